"""Dense tensors and the reverse-mode tape that records operations on them."""

import threading
from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any

import numpy as np

from nres.errors import ContractError

_local = threading.local()

# Storage dtype for tensors built from user data; float64 is used by gradient checks.
_default_dtype: np.dtype = np.dtype(np.float32)


def get_dtype() -> np.dtype:
    """Return the storage dtype for newly created tensors."""
    return getattr(_local, "dtype", _default_dtype)


@contextmanager
def precision(dtype: Any) -> Iterator[None]:
    """Create tensors with ``dtype`` storage inside the block.

    Args:
        dtype: numpy float dtype, usually ``np.float64`` for gradient checks
    """
    previous = get_dtype()
    _local.dtype = np.dtype(dtype)
    try:
        yield
    finally:
        _local.dtype = previous


class Tensor:
    """Dense row-major array with an optional gradient requirement.

    Tensors hash by identity so they can key gradient maps.
    """

    __slots__ = ("data", "requires_grad", "name")

    def __init__(
        self,
        data: Any,
        requires_grad: bool = False,
        name: str | None = None,
    ):
        self.data = np.ascontiguousarray(data, dtype=get_dtype())
        self.requires_grad = requires_grad
        self.name = name

    @classmethod
    def wrap(cls, array: np.ndarray, requires_grad: bool = False) -> "Tensor":
        """Wrap an op result without recasting its dtype."""
        tensor = cls.__new__(cls)
        tensor.data = np.ascontiguousarray(array)
        tensor.requires_grad = requires_grad
        tensor.name = None
        return tensor

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def item(self) -> float:
        """Return the value of a single-element tensor."""
        if self.data.size != 1:
            raise ContractError(f"item() needs one element, got shape {self.shape}")
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        """Return a copy of the underlying array."""
        return self.data.copy()

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{label})"

    def __add__(self, other: "Tensor | float") -> "Tensor":
        from nres.tensor import ops

        return ops.add(self, other)

    __radd__ = __add__

    def __sub__(self, other: "Tensor | float") -> "Tensor":
        from nres.tensor import ops

        return ops.sub(self, other)

    def __mul__(self, other: "Tensor | float") -> "Tensor":
        from nres.tensor import ops

        return ops.mul(self, other)

    __rmul__ = __mul__

    def __neg__(self) -> "Tensor":
        from nres.tensor import ops

        return ops.scale(self, -1.0)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        from nres.tensor import ops

        return ops.matmul(self, other)


# Receives the output adjoint and one flag per input saying whether that
# input needs a gradient; returns one adjoint (or None) per input.
BackwardFn = Callable[[np.ndarray, tuple[bool, ...]], Sequence[np.ndarray | None]]


@dataclass(frozen=True)
class _Node:
    out: Tensor
    inputs: tuple[Tensor, ...]
    backward: BackwardFn


class Tape:
    """Ordered record of executed operations.

    Operations record onto the innermost active tape. Outside any tape they
    only compute values, which is how inference runs.

    Example:
        with Tape() as tape:
            loss = softmax_cross_entropy(model_logits, targets)
        grads = tape.backward(loss, params)
    """

    def __init__(self) -> None:
        self._nodes: list[_Node] = []

    def __enter__(self) -> "Tape":
        _stack().append(self)
        return self

    def __exit__(self, *exc: object) -> None:
        _stack().remove(self)

    def __len__(self) -> int:
        return len(self._nodes)

    def record(self, node: _Node) -> None:
        self._nodes.append(node)

    def backward(
        self, root: Tensor, params: Sequence[Tensor] | None = None
    ) -> dict[Tensor, np.ndarray]:
        """Replay the tape in reverse and return d(root)/d(param).

        Args:
            root: Single-element tensor produced on this tape (or a constant)
            params: Leaves to report; defaults to every leaf requiring grad

        Returns:
            Gradient per requested parameter, zeros where root does not depend on it

        Raises:
            ContractError: If root is not a scalar
        """
        if root.size != 1:
            raise ContractError(
                f"backward needs a scalar root, got shape {root.shape}"
            )
        if params is None:
            params = self._leaves()

        # Accumulators start empty on every pass; missing entries read as zero.
        grads: dict[int, np.ndarray] = {id(root): np.ones(root.shape, np.float64)}
        for node in reversed(self._nodes):
            upstream = grads.pop(id(node.out), None)
            if upstream is None:
                continue
            needs = tuple(t.requires_grad for t in node.inputs)
            adjoints = node.backward(upstream, needs)
            for tensor, adjoint, need in zip(node.inputs, adjoints, needs):
                if not need or adjoint is None:
                    continue
                key = id(tensor)
                if key in grads:
                    grads[key] = grads[key] + adjoint
                else:
                    grads[key] = np.asarray(adjoint, dtype=np.float64)

        result: dict[Tensor, np.ndarray] = {}
        for param in params:
            grad = grads.get(id(param))
            if grad is None:
                result[param] = np.zeros(param.shape, dtype=param.dtype)
            else:
                result[param] = grad.reshape(param.shape).astype(param.dtype)
        return result

    def _leaves(self) -> list[Tensor]:
        produced = {id(node.out) for node in self._nodes}
        seen: set[int] = set()
        leaves = []
        for node in self._nodes:
            for tensor in node.inputs:
                key = id(tensor)
                if tensor.requires_grad and key not in produced and key not in seen:
                    seen.add(key)
                    leaves.append(tensor)
        return leaves


def _stack() -> list[Tape]:
    stack = getattr(_local, "tapes", None)
    if stack is None:
        stack = []
        _local.tapes = stack
    return stack


def active_tape() -> Tape | None:
    """Return the innermost tape of this thread, if any."""
    stack = _stack()
    return stack[-1] if stack else None


def record(
    out: np.ndarray, inputs: Sequence[Tensor], backward: BackwardFn
) -> Tensor:
    """Wrap an op result and register it on the active tape when needed."""
    tape = active_tape()
    track = tape is not None and any(t.requires_grad for t in inputs)
    result = Tensor.wrap(out, requires_grad=track)
    if track:
        assert tape is not None
        tape.record(_Node(result, tuple(inputs), backward))
    return result
