"""Perplexity, gating spectra and tradeoff reporting."""

from nres.analysis.perplexity import (
    LanguageModel,
    eval_windows,
    perplexity,
    window_nll,
)
from nres.analysis.spectra import (
    gating_spectra,
    matrix_spectrum,
    normalize_spectrum,
    skewness_metric,
    write_spectra_csv,
)
from nres.analysis.svd import singular_values
from nres.analysis.tradeoff import (
    METRICS_FILE,
    RUN_FILE,
    read_metrics,
    read_run_config,
    tradeoff_row,
    tradeoff_table,
    write_tradeoff_csv,
)

__all__ = [
    "LanguageModel",
    "METRICS_FILE",
    "RUN_FILE",
    "eval_windows",
    "gating_spectra",
    "matrix_spectrum",
    "normalize_spectrum",
    "perplexity",
    "read_metrics",
    "read_run_config",
    "singular_values",
    "skewness_metric",
    "tradeoff_row",
    "tradeoff_table",
    "window_nll",
    "write_spectra_csv",
    "write_tradeoff_csv",
]
