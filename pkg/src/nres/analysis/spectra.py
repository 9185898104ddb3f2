"""Spectral diagnostic of gating matrices."""

import csv
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from nres.analysis.svd import singular_values
from nres.errors import ContractError
from nres.models import MatrixSpectrum, SpectrumReport
from nres.nn import BackboneModel, ExtendedModel


def normalize_spectrum(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """Sort descending and divide by the largest value; all zeros stay zeros."""
    s = np.sort(np.abs(np.asarray(values, dtype=np.float64)))[::-1]
    if s.size == 0 or s[0] == 0.0:
        return np.zeros_like(s)
    return s / s[0]


def skewness_metric(spectrum: Sequence[float] | np.ndarray) -> float:
    """``1 - mean(s)`` of a normalized spectrum: 0 when flat, near 1 when rank-1.

    Raises:
        ContractError: If the spectrum is empty, does not start at 1, or increases
    """
    s = np.asarray(spectrum, dtype=np.float64)
    if s.size == 0:
        raise ContractError("skewness of an empty spectrum")
    if abs(s[0] - 1.0) > 1e-9 or np.any(np.diff(s) > 1e-12):
        raise ContractError("spectrum must start at 1 and be non-increasing")
    return float(1.0 - s.mean())


def matrix_spectrum(owner: str, layer: int, matrix: np.ndarray) -> MatrixSpectrum:
    values = normalize_spectrum(singular_values(matrix))
    zero = not np.any(matrix)
    return MatrixSpectrum(
        owner=owner,
        layer=layer,
        values=values.tolist(),
        skewness=0.0 if zero else skewness_metric(values),
        zero_matrix=zero,
    )


def gating_spectra(model: BackboneModel | ExtendedModel) -> SpectrumReport:
    """Normalized spectra of every backbone ``W_g`` and adapter ``A_g``.

    LoRA models report the effective ``W_g`` including the low-rank delta.
    """
    if isinstance(model, ExtendedModel):
        matrices = model.gating_matrices()
    else:
        matrices = [
            ("backbone", i, block.w_g.data.astype(np.float64))
            for i, block in enumerate(model.layers)
        ]
    return SpectrumReport(
        matrices=[matrix_spectrum(owner, i, m) for owner, i, m in matrices]
    )


def write_spectra_csv(report: SpectrumReport, path: Path | str) -> Path:
    """Write ``owner,layer,index,value`` rows, one per singular value."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["owner", "layer", "index", "value"])
        for m in report.matrices:
            for index, value in enumerate(m.values):
                writer.writerow([m.owner, m.layer, index, repr(value)])
    return path
