"""Training objective: LM loss plus local gate-supervision losses."""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from nres.errors import ConfigurationError
from nres.models import LossSnapshot
from nres.tensor import (
    Tensor,
    absolute,
    add,
    binary_cross_entropy,
    mul,
    scale,
    total,
)


@dataclass(frozen=True)
class DomainMask:
    """Per-sequence domain flag: True for original-domain sequences."""

    is_original: np.ndarray

    @classmethod
    def from_flags(cls, flags: Sequence[bool]) -> "DomainMask":
        return cls(np.asarray(flags, dtype=bool))

    def __len__(self) -> int:
        return int(self.is_original.shape[0])

    @property
    def n_original(self) -> int:
        return int(self.is_original.sum())


def _constant(value: float, like: Tensor | None = None) -> Tensor:
    dtype = like.dtype if like is not None else np.float32
    return Tensor.wrap(np.asarray(value, dtype=dtype))


def l1_local_loss(
    adapter_outputs: Sequence[Tensor], mask: DomainMask, d: int
) -> Tensor:
    """Mean over layers and original-domain tokens of ``‖y‖₁ / d``.

    New-domain tokens contribute nothing, not even gradient; a batch with no
    original-domain sequence returns a constant 0.

    Args:
        adapter_outputs: Post-gate adapter outputs ``y[B, T, d]``, one per layer
        mask: Domain of each of the B sequences
        d: Model dimension used for normalization
    """
    if d <= 0:
        raise ConfigurationError(f"d must be positive, got {d}")
    if not adapter_outputs or mask.n_original == 0:
        return _constant(0.0, adapter_outputs[0] if adapter_outputs else None)

    first = adapter_outputs[0]
    b, t = first.shape[0], first.shape[1]
    n_tokens = mask.n_original * t * len(adapter_outputs)
    weights = np.zeros(first.shape, dtype=first.dtype)
    weights[mask.is_original] = 1.0 / (n_tokens * d)
    w = Tensor.wrap(weights)

    loss: Tensor | None = None
    for y in adapter_outputs:
        term = total(mul(absolute(y), w))
        loss = term if loss is None else add(loss, term)
    assert loss is not None
    return loss


def gate_ce_loss(
    gate_values: Sequence[Tensor], mask: DomainMask, gate: str = "sigmoid"
) -> Tensor:
    """Binary cross-entropy of sigmoid gates: original → 0, new → 1.

    Averaged uniformly over every layer and token.

    Raises:
        ConfigurationError: If the gate is not a sigmoid gate
    """
    if gate != "sigmoid":
        raise ConfigurationError(f"gate CE loss needs a sigmoid gate, got '{gate}'")
    if not gate_values:
        return _constant(0.0)

    loss: Tensor | None = None
    for g in gate_values:
        targets = np.ones(g.shape, dtype=np.float64)
        targets[mask.is_original] = 0.0
        term = binary_cross_entropy(g, targets)
        loss = term if loss is None else add(loss, term)
    assert loss is not None
    return scale(loss, 1.0 / len(gate_values))


@dataclass
class LossBreakdown:
    """``total = lm + alpha · (local_l1 + local_ce)``; absent terms are 0."""

    lm: Tensor
    local_l1: Tensor
    local_ce: Tensor
    alpha: float
    total: Tensor

    def snapshot(self) -> LossSnapshot:
        return LossSnapshot(
            lm_loss=self.lm.item(),
            local_l1=self.local_l1.item(),
            local_ce=self.local_ce.item(),
            total=self.total.item(),
        )


def combine(
    lm: Tensor | float,
    local_l1: Tensor | float | None,
    local_ce: Tensor | float | None,
    alpha: float,
) -> LossBreakdown:
    """Weight the local losses by ``alpha`` and add the LM loss.

    Raises:
        ConfigurationError: If ``alpha`` is negative
    """
    if alpha < 0:
        raise ConfigurationError(f"alpha must be >= 0, got {alpha}")
    lm_t = lm if isinstance(lm, Tensor) else _constant(lm)
    l1_t = (
        local_l1
        if isinstance(local_l1, Tensor)
        else _constant(local_l1 or 0.0, lm_t)
    )
    ce_t = (
        local_ce
        if isinstance(local_ce, Tensor)
        else _constant(local_ce or 0.0, lm_t)
    )
    out = add(lm_t, scale(add(l1_t, ce_t), alpha))
    return LossBreakdown(
        lm=lm_t, local_l1=l1_t, local_ce=ce_t, alpha=alpha, total=out
    )
