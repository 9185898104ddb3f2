"""Differentiable operations over :class:`Tensor`.

Every op computes in float64 and casts back to the storage dtype of its
inputs, so reductions (dot products, norms, loss means) accumulate in
float64 while tensors stay float32. Adjoints are float64.
"""

import math
from typing import Literal

import numpy as np

from nres.errors import ConfigurationError, DimensionError, TokenRangeError
from nres.tensor.core import Tensor, record

Activation = Literal["silu", "gelu", "relu", "sigmoid"]

_F64 = np.float64
_GELU_C = math.sqrt(2.0 / math.pi)


def _f64(t: Tensor) -> np.ndarray:
    return t.data.astype(_F64, copy=False)


def _as_tensor(value: "Tensor | float", like: Tensor) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor.wrap(np.asarray(value, dtype=like.dtype))


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    return np.asarray(grad.sum()).reshape(shape)


def _check_elementwise(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape == b.shape or a.size == 1 or b.size == 1:
        return
    raise DimensionError(f"{op} shape mismatch: {a.shape} vs {b.shape}")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product.

    ``a[..., m, k] @ b[k, n]`` applies ``b`` to every row of ``a``;
    ``a[..., m, k] @ b[..., k, n]`` with equal leading extents is a batched
    product.

    Raises:
        DimensionError: If inner extents or batch extents differ
    """
    if a.ndim < 1 or b.ndim < 2:
        raise DimensionError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise DimensionError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    batched = b.ndim > 2
    if batched and a.shape[:-2] != b.shape[:-2]:
        raise DimensionError(f"matmul shape mismatch: {a.shape} x {b.shape}")

    a64, b64 = _f64(a), _f64(b)
    out = np.matmul(a64, b64).astype(np.result_type(a.dtype, b.dtype))

    def backward(g: np.ndarray, needs: tuple[bool, ...]):
        ga = np.matmul(g, np.swapaxes(b64, -1, -2)) if needs[0] else None
        gb = None
        if needs[1]:
            if batched:
                gb = np.matmul(np.swapaxes(a64, -1, -2), g)
            else:
                k, n = b.shape
                gb = a64.reshape(-1, k).T @ g.reshape(-1, n)
        return ga, gb

    return record(out, (a, b), backward)


def add(a: Tensor, b: "Tensor | float") -> Tensor:
    """Pointwise sum; ``b`` may be a scalar or a single-element tensor."""
    b = _as_tensor(b, a)
    _check_elementwise(a, b, "add")
    out = a.data + b.data

    def backward(g: np.ndarray, needs: tuple[bool, ...]):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return record(out, (a, b), backward)


def sub(a: Tensor, b: "Tensor | float") -> Tensor:
    """Pointwise difference ``a - b``."""
    b = _as_tensor(b, a)
    _check_elementwise(a, b, "sub")
    out = a.data - b.data

    def backward(g: np.ndarray, needs: tuple[bool, ...]):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return record(out, (a, b), backward)


def mul(a: Tensor, b: "Tensor | float") -> Tensor:
    """Pointwise product (the ``⊙`` of gated linear units)."""
    b = _as_tensor(b, a)
    _check_elementwise(a, b, "mul")
    out = a.data * b.data

    def backward(g: np.ndarray, needs: tuple[bool, ...]):
        ga = _unbroadcast(g * _f64(b), a.shape) if needs[0] else None
        gb = _unbroadcast(g * _f64(a), b.shape) if needs[1] else None
        return ga, gb

    return record(out, (a, b), backward)


def scale(a: Tensor, factor: float) -> Tensor:
    """Multiply every element by a constant."""
    out = (_f64(a) * factor).astype(a.dtype)

    def backward(g: np.ndarray, needs: tuple[bool, ...]):
        return (g * factor,)

    return record(out, (a,), backward)


def elementwise(
    op: Literal["add", "mul", "scale"], a: Tensor, b: "Tensor | float"
) -> Tensor:
    """Dispatch a pointwise op by name."""
    if op == "add":
        return add(a, b)
    if op == "mul":
        return mul(a, b)
    if op == "scale":
        if isinstance(b, Tensor):
            return mul(a, b)
        return scale(a, float(b))
    raise ConfigurationError(f"Unknown elementwise op '{op}'")


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -x))


def activation(kind: str, x: Tensor) -> Tensor:
    """Pointwise nonlinearity.

    ``gelu`` is the tanh approximation
    ``0.5 * x * (1 + tanh(sqrt(2/pi) * (x + 0.044715 * x**3)))``.

    Raises:
        ConfigurationError: If ``kind`` is not silu, gelu, relu or sigmoid
    """
    x64 = _f64(x)
    if kind == "relu":
        out = np.maximum(x64, 0.0)

        def backward(g: np.ndarray, needs: tuple[bool, ...]):
            return (g * (x64 > 0.0),)

    elif kind == "sigmoid":
        s = _sigmoid(x64)
        out = s

        def backward(g: np.ndarray, needs: tuple[bool, ...]):
            return (g * s * (1.0 - s),)

    elif kind == "silu":
        s = _sigmoid(x64)
        out = x64 * s

        def backward(g: np.ndarray, needs: tuple[bool, ...]):
            return (g * (s + x64 * s * (1.0 - s)),)

    elif kind == "gelu":
        inner = _GELU_C * (x64 + 0.044715 * x64**3)
        t = np.tanh(inner)
        out = 0.5 * x64 * (1.0 + t)

        def backward(g: np.ndarray, needs: tuple[bool, ...]):
            d_inner = _GELU_C * (1.0 + 3.0 * 0.044715 * x64**2)
            return (g * (0.5 * (1.0 + t) + 0.5 * x64 * (1.0 - t**2) * d_inner),)

    else:
        raise ConfigurationError(f"Unknown activation '{kind}'")

    return record(out.astype(x.dtype), (x,), backward)


def rms_norm(x: Tensor, weight: Tensor, eps: float) -> Tensor:
    """Normalize each last-axis vector by its root mean square, then scale.

    Raises:
        DimensionError: If ``weight`` does not match the last extent of ``x``
        ConfigurationError: If ``eps`` is negative
    """
    if weight.shape != x.shape[-1:]:
        raise DimensionError(
            f"rms_norm weight {weight.shape} does not match input {x.shape}"
        )
    if eps < 0:
        raise ConfigurationError(f"rms_norm eps must be >= 0, got {eps}")

    x64, w64 = _f64(x), _f64(weight)
    inv = 1.0 / np.sqrt(np.mean(x64 * x64, axis=-1, keepdims=True) + eps)
    xhat = x64 * inv
    out = (xhat * w64).astype(x.dtype)

    def backward(g: np.ndarray, needs: tuple[bool, ...]):
        gx = gw = None
        if needs[1]:
            gw = (g * xhat).reshape(-1, x.shape[-1]).sum(axis=0)
        if needs[0]:
            gxhat = g * w64
            gx = inv * (gxhat - xhat * np.mean(gxhat * xhat, axis=-1, keepdims=True))
        return gx, gw

    return record(out, (x, weight), backward)


def embedding(table: Tensor, ids: np.ndarray) -> Tensor:
    """Gather rows of ``table`` for integer ``ids`` of any shape.

    Raises:
        TokenRangeError: If an id is outside ``[0, rows)``
    """
    ids = np.asarray(ids)
    rows = table.shape[0]
    if ids.size and (ids.min() < 0 or ids.max() >= rows):
        raise TokenRangeError(
            f"token id out of range [0, {rows}): min={ids.min()}, max={ids.max()}"
        )
    out = table.data[ids]

    def backward(g: np.ndarray, needs: tuple[bool, ...]):
        grad = np.zeros(table.shape, dtype=_F64)
        np.add.at(grad, ids.reshape(-1), g.reshape(-1, table.shape[-1]))
        return (grad,)

    return record(out, (table,), backward)


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    """Row-major reshape."""
    original = x.shape
    out = x.data.reshape(shape)

    def backward(g: np.ndarray, needs: tuple[bool, ...]):
        return (g.reshape(original),)

    return record(out, (x,), backward)


def transpose(x: Tensor, axes: tuple[int, ...]) -> Tensor:
    """Permute axes (copied, no strided views)."""
    inverse = tuple(np.argsort(axes))
    out = np.ascontiguousarray(np.transpose(x.data, axes))

    def backward(g: np.ndarray, needs: tuple[bool, ...]):
        return (np.transpose(g, inverse),)

    return record(out, (x,), backward)


def causal_softmax(scores: Tensor) -> Tensor:
    """Softmax over the last axis of ``[..., T, T]`` scores with a causal mask.

    Position ``i`` attends to positions ``j <= i`` only.
    """
    t = scores.shape[-1]
    if scores.ndim < 2 or scores.shape[-2] != t:
        raise DimensionError(f"causal_softmax needs [..., T, T], got {scores.shape}")
    blocked = np.triu(np.ones((t, t), dtype=bool), k=1)
    s64 = np.where(blocked, -np.inf, _f64(scores))
    s64 = s64 - s64.max(axis=-1, keepdims=True)
    e = np.exp(s64)
    p = e / e.sum(axis=-1, keepdims=True)

    def backward(g: np.ndarray, needs: tuple[bool, ...]):
        return (p * (g - np.sum(g * p, axis=-1, keepdims=True)),)

    return record(p.astype(scores.dtype), (scores,), backward)


def rowwise_scale(x: Tensor, gate: Tensor) -> Tensor:
    """Multiply each last-axis vector of ``x[..., d]`` by ``gate[..., 1]``."""
    if gate.shape != x.shape[:-1] + (1,):
        raise DimensionError(
            f"rowwise_scale gate {gate.shape} does not match input {x.shape}"
        )
    x64, g64 = _f64(x), _f64(gate)
    out = (x64 * g64).astype(np.result_type(x.dtype, gate.dtype))

    def backward(g: np.ndarray, needs: tuple[bool, ...]):
        gx = g * g64 if needs[0] else None
        gg = np.sum(g * x64, axis=-1, keepdims=True) if needs[1] else None
        return gx, gg

    return record(out, (x, gate), backward)


def absolute(x: Tensor) -> Tensor:
    """Pointwise absolute value; the subgradient at 0 is 0."""
    x64 = _f64(x)

    def backward(g: np.ndarray, needs: tuple[bool, ...]):
        return (g * np.sign(x64),)

    return record(np.abs(x.data), (x,), backward)


def total(x: Tensor) -> Tensor:
    """Sum of all elements as a scalar tensor."""
    out = np.asarray(_f64(x).sum(), dtype=x.dtype)

    def backward(g: np.ndarray, needs: tuple[bool, ...]):
        return (np.broadcast_to(g, x.shape),)

    return record(out, (x,), backward)


def mean(x: Tensor) -> Tensor:
    """Mean of all elements as a scalar tensor."""
    n = x.size
    out = np.asarray(_f64(x).mean(), dtype=x.dtype)

    def backward(g: np.ndarray, needs: tuple[bool, ...]):
        return (np.broadcast_to(g / n, x.shape),)

    return record(out, (x,), backward)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    """Max-stabilized log-softmax over the last axis, in float64."""
    z = np.asarray(logits, dtype=_F64)
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def token_nll(logits: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Per-position negative log-likelihood of ``targets`` under ``logits``.

    Raises:
        TokenRangeError: If a target is outside ``[0, V)``
    """
    targets = np.asarray(targets)
    vocab = logits.shape[-1]
    if targets.size and (targets.min() < 0 or targets.max() >= vocab):
        raise TokenRangeError(
            f"target out of range [0, {vocab}): "
            f"min={targets.min()}, max={targets.max()}"
        )
    logp = log_softmax(logits)
    return -np.take_along_axis(logp, targets[..., None], axis=-1)[..., 0]


def softmax_cross_entropy(logits: Tensor, targets: np.ndarray) -> Tensor:
    """Mean over positions of ``-log softmax(logits)[target]``.

    Args:
        logits: ``[..., V]`` scores
        targets: integer ids with shape ``logits.shape[:-1]``

    Raises:
        TokenRangeError: If a target is outside ``[0, V)``
    """
    targets = np.asarray(targets)
    if targets.shape != logits.shape[:-1]:
        raise DimensionError(
            f"targets {targets.shape} do not match logits {logits.shape}"
        )
    nll = token_nll(logits.data, targets)
    n = max(nll.size, 1)
    out = np.asarray(nll.mean(), dtype=logits.dtype)

    def backward(g: np.ndarray, needs: tuple[bool, ...]):
        probs = np.exp(log_softmax(logits.data))
        np.put_along_axis(
            probs,
            targets[..., None],
            np.take_along_axis(probs, targets[..., None], axis=-1) - 1.0,
            axis=-1,
        )
        return (probs * (g / n),)

    return record(out, (logits,), backward)


def binary_cross_entropy(
    probs: Tensor, targets: np.ndarray, eps: float = 1e-7
) -> Tensor:
    """Mean binary cross-entropy with probabilities clamped to ``[eps, 1-eps]``.

    Clamped entries pass no gradient.
    """
    targets = np.asarray(targets, dtype=_F64)
    if targets.shape != probs.shape:
        raise DimensionError(f"targets {targets.shape} do not match {probs.shape}")
    raw = _f64(probs)
    p = np.clip(raw, eps, 1.0 - eps)
    n = max(p.size, 1)
    loss = -(targets * np.log(p) + (1.0 - targets) * np.log1p(-p))
    out = np.asarray(loss.mean(), dtype=probs.dtype)

    def backward(g: np.ndarray, needs: tuple[bool, ...]):
        inside = (raw >= eps) & (raw <= 1.0 - eps)
        d = (-(targets / p) + (1.0 - targets) / (1.0 - p)) * inside
        return (d * (g / n),)

    return record(out, (probs,), backward)
