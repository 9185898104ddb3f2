"""AdamW with decoupled weight decay."""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from nres.errors import DimensionError, NumericError
from nres.tensor import Tensor


@dataclass
class OptimState:
    """First and second moments keyed by parameter name, plus the step count.

    Moments are created lazily, so parameters never passed to
    :func:`adamw_step` (frozen ones) hold no state.
    """

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def check_finite(grads: Mapping[str, np.ndarray]) -> None:
    """Raise NumericError naming the first parameter with a non-finite gradient."""
    for name, grad in grads.items():
        if not np.all(np.isfinite(grad)):
            raise NumericError(f"non-finite gradient for parameter '{name}'")


def clip_grad_norm(grads: dict[str, np.ndarray], max_norm: float) -> float:
    """Scale ``grads`` in place so their global L2 norm is at most ``max_norm``.

    Returns:
        The norm before clipping
    """
    squares = sum(float(np.sum(np.square(g, dtype=np.float64))) for g in grads.values())
    norm = float(np.sqrt(squares))
    if norm > max_norm:
        factor = max_norm / norm
        for name in grads:
            grads[name] = grads[name] * factor
    return norm


def adamw_step(
    params: Sequence[tuple[str, Tensor]],
    grads: Mapping[str, np.ndarray],
    state: OptimState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.95,
    eps: float = 1e-8,
    weight_decay: float = 0.0,
) -> None:
    """Update ``params`` in place: decay ``p *= 1 - lr*wd``, then bias-corrected Adam.

    Every gradient is validated before any parameter changes.

    Raises:
        NumericError: If a gradient is non-finite
        DimensionError: If a gradient's shape differs from its parameter
    """
    check_finite({name: grads[name] for name, _ in params})
    for name, param in params:
        if grads[name].shape != param.shape:
            raise DimensionError(
                f"gradient for '{name}' has shape {grads[name].shape}, "
                f"parameter has {param.shape}"
            )

    state.t += 1
    bias1 = 1.0 - beta1**state.t
    bias2 = 1.0 - beta2**state.t
    for name, param in params:
        g = grads[name].astype(np.float64)
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None or v is None:
            m = np.zeros(param.shape, dtype=np.float64)
            v = np.zeros(param.shape, dtype=np.float64)
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        state.m[name], state.v[name] = m, v

        p = param.data.astype(np.float64)
        p *= 1.0 - lr * weight_decay
        p -= lr * (m / bias1) / (np.sqrt(v / bias2) + eps)
        param.data[...] = p


class AdamW:
    """Stateful wrapper binding a parameter list to its hyperparameters."""

    def __init__(
        self,
        params: Sequence[tuple[str, Tensor]],
        beta1: float = 0.9,
        beta2: float = 0.95,
        eps: float = 1e-8,
        weight_decay: float = 0.0,
    ):
        self.params = list(params)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.state = OptimState()

    def step(self, grads: Mapping[str, np.ndarray], lr: float) -> None:
        adamw_step(
            self.params,
            grads,
            self.state,
            lr,
            self.beta1,
            self.beta2,
            self.eps,
            self.weight_decay,
        )
