"""Singular values by one-sided Jacobi rotations."""

import numpy as np

MAX_SWEEPS = 60


def singular_values(matrix: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    """Singular values of a real 2-D matrix, sorted descending.

    Columns are rotated pairwise until every pair is orthogonal to within
    ``tol``; the column norms are then the singular values.
    """
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    if a.shape[1] > a.shape[0]:
        a = a.T
    n = a.shape[1]

    for _ in range(MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = a[:, p] @ a[:, p]
                beta = a[:, q] @ a[:, q]
                gamma = a[:, p] @ a[:, q]
                if abs(gamma) <= tol * np.sqrt(alpha * beta) or gamma == 0.0:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = np.copysign(1.0, zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                col_p = a[:, p].copy()
                a[:, p] = c * col_p - s * a[:, q]
                a[:, q] = s * col_p + c * a[:, q]
        if not rotated:
            break

    return np.sort(np.linalg.norm(a, axis=0))[::-1]
