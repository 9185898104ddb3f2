"""Cross-product sweep command."""

from pathlib import Path
from typing import Optional

import typer
from pydantic import ValidationError
from typing_extensions import Annotated

from nres.commands.common import EXIT_RUNTIME, EXIT_USAGE, fail, validation_message
from nres.errors import FormatError, MetricsParseError, NresError
from nres.formatters import format_tradeoff_json, format_tradeoff_table
from nres.models import SweepGrid
from nres.runs import load_model, run_sweep


def sweep(
    grid: Annotated[
        Path, typer.Option("--grid", "-g", help="Sweep grid file (JSON or YAML)")
    ],
    backbone: Annotated[
        Path, typer.Option("--backbone", "-b", help="Pretrained backbone checkpoint")
    ],
    out: Annotated[
        Path, typer.Option("--out", "-o", help="Output directory")
    ] = Path("runs/sweep"),
    workers: Annotated[
        Optional[int],
        typer.Option("--workers", "-w", min=1, help="Parallel runs (default: CPUs)"),
    ] = None,
    format: Annotated[
        str, typer.Option("--format", "-f", help="Output format: table, json")
    ] = "table",
) -> None:
    """Run every point of a grid and print the learning/forgetting tradeoff.

    Examples:

      # grid.json: {"method": ["finetune", "neutral-residues"], "lr": [1e-4, 3e-4]}
      nres sweep --grid grid.json -b runs/backbone/model.ckpt --workers 4
    """
    try:
        sweep_grid = load_model(SweepGrid, grid)
        rows = run_sweep(sweep_grid, backbone, out, workers)

        if format == "json":
            format_tradeoff_json(rows)
        else:  # table
            format_tradeoff_table(rows)

    except ValidationError as e:
        fail(f"Invalid grid: {validation_message(e)}", EXIT_USAGE)
    except MetricsParseError as e:
        fail(str(e), EXIT_RUNTIME)
    except (ValueError, FormatError) as e:
        fail(str(e), EXIT_USAGE)
    except NresError as e:
        fail(str(e), EXIT_RUNTIME)
    except Exception as e:
        fail(f"Unexpected error: {e}", EXIT_RUNTIME)
