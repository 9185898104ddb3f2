"""Output formatters for nres."""

from nres.formatters.evaluation import format_eval_detail, format_eval_json
from nres.formatters.spectra import format_spectra_json, format_spectra_table
from nres.formatters.tradeoff import format_tradeoff_json, format_tradeoff_table

__all__ = [
    # Evaluation
    "format_eval_detail",
    "format_eval_json",
    # Spectra
    "format_spectra_table",
    "format_spectra_json",
    # Tradeoff
    "format_tradeoff_table",
    "format_tradeoff_json",
]
