"""Central finite-difference checks for tape gradients."""

from collections.abc import Callable, Sequence

import numpy as np

from nres.tensor.core import Tape, Tensor


def numerical_gradient(
    fn: Callable[[], Tensor],
    param: Tensor,
    h: float = 1e-3,
    indices: Sequence[int] | None = None,
) -> np.ndarray:
    """Estimate d(fn)/d(param) by central differences, accumulating in float64.

    Args:
        fn: Zero-argument closure recomputing the scalar objective
        param: Tensor perturbed in place (restored afterwards)
        h: Step size
        indices: Flat indices to perturb; all entries when omitted

    Returns:
        Array shaped like ``param`` (entries outside ``indices`` are 0)
    """
    flat = param.data.reshape(-1)
    grad = np.zeros(flat.shape, dtype=np.float64)
    chosen = range(flat.size) if indices is None else indices
    for i in chosen:
        original = flat[i]
        flat[i] = original + h
        plus = float(fn().item())
        flat[i] = original - h
        minus = float(fn().item())
        flat[i] = original
        grad[i] = (plus - minus) / (2.0 * h)
    return grad.reshape(param.shape)


def max_relative_error(
    fn: Callable[[], Tensor],
    params: Sequence[Tensor],
    h: float = 1e-3,
    max_entries: int | None = 24,
    seed: int = 0,
) -> float:
    """Largest relative disagreement between tape and numerical gradients.

    Each parameter's error is ``max|analytic - numeric|`` divided by the larger
    of the two gradients' max magnitudes, so tiny entries do not dominate.

    Args:
        fn: Zero-argument closure building the scalar objective
        params: Parameters to check
        h: Finite-difference step
        max_entries: Entries checked per parameter (sampled with ``seed``)
        seed: Sampling seed for the checked entries
    """
    with Tape() as tape:
        root = fn()
    analytic = tape.backward(root, params)

    rng = np.random.default_rng(seed)
    worst = 0.0
    for param in params:
        if max_entries is None or param.size <= max_entries:
            indices = np.arange(param.size)
        else:
            indices = np.sort(rng.choice(param.size, size=max_entries, replace=False))
        numeric = numerical_gradient(fn, param, h, indices).reshape(-1)[indices]
        exact = analytic[param].astype(np.float64).reshape(-1)[indices]
        scale = max(np.abs(numeric).max(), np.abs(exact).max(), 1e-12)
        worst = max(worst, float(np.abs(numeric - exact).max() / scale))
    return worst
