"""Minimal parameter container shared by backbone and extension blocks."""

from collections.abc import Iterator, Mapping

import numpy as np

from nres.errors import ConfigurationError, DimensionError
from nres.tensor import Tensor


class Module:
    """Object whose Tensor attributes are its parameters.

    Parameters are discovered in attribute definition order, recursing into
    child modules and lists of modules, so names and order are deterministic
    for a given construction sequence.
    """

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
        for name, value in vars(self).items():
            if isinstance(value, Tensor):
                yield f"{prefix}{name}", value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{prefix}{name}.")
            elif isinstance(value, list):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{prefix}{name}.{i}.")

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]

    def trainable_parameters(self) -> list[tuple[str, Tensor]]:
        """Named parameters that currently receive gradients."""
        return [(n, p) for n, p in self.named_parameters() if p.requires_grad]

    def freeze(self) -> None:
        """Stop every parameter from receiving gradients."""
        for p in self.parameters():
            p.requires_grad = False

    def unfreeze(self) -> None:
        for p in self.parameters():
            p.requires_grad = True

    def state_dict(self) -> dict[str, np.ndarray]:
        """Copy of every parameter array keyed by name."""
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: Mapping[str, np.ndarray]) -> None:
        """Overwrite parameters in place from ``state``.

        Raises:
            ConfigurationError: If names differ from this module's parameters
            DimensionError: If a shape differs
        """
        params = dict(self.named_parameters())
        missing = sorted(set(params) - set(state))
        unexpected = sorted(set(state) - set(params))
        if missing or unexpected:
            raise ConfigurationError(
                f"state mismatch: missing={missing} unexpected={unexpected}"
            )
        for name, param in params.items():
            array = np.asarray(state[name])
            if array.shape != param.shape:
                raise DimensionError(
                    f"parameter '{name}' has shape {param.shape}, "
                    f"state has {array.shape}"
                )
            param.data[...] = array


def count_params(model: Module, trainable_only: bool = False) -> int:
    """Exact parameter count, optionally only those receiving gradients."""
    return sum(
        p.size
        for _, p in model.named_parameters()
        if p.requires_grad or not trainable_only
    )
