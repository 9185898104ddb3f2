"""Evaluation and spectral diagnostic commands."""

import json
from pathlib import Path
from typing import Optional

import typer
from pydantic import ValidationError
from typing_extensions import Annotated

from nres.analysis import gating_spectra, write_spectra_csv
from nres.commands.common import EXIT_RUNTIME, EXIT_USAGE, fail, validation_message
from nres.errors import FormatError, NresError
from nres.formatters import (
    format_eval_detail,
    format_eval_json,
    format_spectra_json,
    format_spectra_table,
)
from nres.models import RunConfig
from nres.runs import evaluate_checkpoint, load_model
from nres.training import load_checkpoint


def evaluate(
    checkpoint: Annotated[Path, typer.Argument(help="Model checkpoint")],
    config: Annotated[
        Optional[Path],
        typer.Option("--config", "-c", help="Run config providing the corpora"),
    ] = None,
    max_windows: Annotated[
        Optional[int],
        typer.Option("--max-windows", min=1, help="Cap on windows per domain"),
    ] = None,
    out: Annotated[
        Optional[Path], typer.Option("--out", "-o", help="Also write eval.json here")
    ] = None,
    format: Annotated[
        str, typer.Option("--format", "-f", help="Output format: detail, json")
    ] = "detail",
) -> None:
    """Held-out perplexity of a checkpoint on both domains.

    Examples:

      nres eval runs/extend/model.ckpt

      nres eval runs/extend/model.ckpt --format json --out runs/extend
    """
    try:
        run_config = load_model(RunConfig, config)
        report = evaluate_checkpoint(checkpoint, run_config, max_windows)

        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
            (out / "eval.json").write_text(
                json.dumps(report.model_dump(mode="json"), indent=2) + "\n",
                encoding="utf-8",
            )

        if format == "json":
            format_eval_json(report)
        else:  # detail
            format_eval_detail(report, str(checkpoint))

    except ValidationError as e:
        fail(f"Invalid configuration: {validation_message(e)}", EXIT_USAGE)
    except (ValueError, FormatError) as e:
        fail(str(e), EXIT_USAGE)
    except NresError as e:
        fail(str(e), EXIT_RUNTIME)
    except Exception as e:
        fail(f"Unexpected error: {e}", EXIT_RUNTIME)


def spectra(
    checkpoint: Annotated[Path, typer.Argument(help="Model checkpoint")],
    out: Annotated[
        Optional[Path], typer.Option("--out", "-o", help="Also write spectra.csv here")
    ] = None,
    format: Annotated[
        str, typer.Option("--format", "-f", help="Output format: table, json")
    ] = "table",
) -> None:
    """Singular-value spectra of every gating matrix.

    Examples:

      nres spectra runs/extend/model.ckpt --out runs/extend
    """
    try:
        report = gating_spectra(load_checkpoint(checkpoint))

        if out is not None:
            write_spectra_csv(report, out / "spectra.csv")

        if format == "json":
            format_spectra_json(report)
        else:  # table
            format_spectra_table(report)

    except (ValueError, FormatError) as e:
        fail(str(e), EXIT_USAGE)
    except NresError as e:
        fail(str(e), EXIT_RUNTIME)
    except Exception as e:
        fail(f"Unexpected error: {e}", EXIT_RUNTIME)
