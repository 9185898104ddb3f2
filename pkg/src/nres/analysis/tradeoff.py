"""Learning-vs-forgetting table from completed run directories."""

import csv
import json
from collections.abc import Iterable
from pathlib import Path

from pydantic import ValidationError

from nres.errors import ContractError, MetricsParseError
from nres.models import EvalReport, RunConfig, TradeoffRow

RUN_FILE = "run.json"
METRICS_FILE = "metrics.jsonl"
TRADEOFF_COLUMNS = ["method", "lr", "p", "alpha", "budget", "nll_old", "nll_new", "run"]


def read_metrics(path: Path | str) -> list[EvalReport]:
    """Parse a metrics JSONL file.

    Raises:
        MetricsParseError: Naming the file and 1-based line of the first bad record
    """
    path = Path(path)
    if not path.is_file():
        raise MetricsParseError(str(path), 0, "file not found")
    reports = []
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            reports.append(EvalReport.model_validate(json.loads(line)))
        except json.JSONDecodeError as e:
            raise MetricsParseError(str(path), number, f"invalid JSON: {e.msg}") from e
        except ValidationError as e:
            raise MetricsParseError(
                str(path), number, f"invalid record: {e.errors()[0]['msg']}"
            ) from e
    return reports


def read_run_config(path: Path | str) -> RunConfig:
    path = Path(path)
    try:
        return RunConfig.model_validate_json(path.read_bytes())
    except FileNotFoundError as e:
        raise MetricsParseError(str(path), 0, "file not found") from e
    except ValidationError as e:
        raise MetricsParseError(str(path), 1, str(e.errors()[0]["msg"])) from e


def tradeoff_row(run_dir: Path | str) -> TradeoffRow:
    """Final evaluation of one run directory holding run.json and metrics.jsonl."""
    run_dir = Path(run_dir)
    config = read_run_config(run_dir / RUN_FILE)
    reports = read_metrics(run_dir / METRICS_FILE)
    if not reports:
        raise MetricsParseError(str(run_dir / METRICS_FILE), 0, "no evaluations")
    final = reports[-1]
    return TradeoffRow(
        method=config.preset or config.extension.method,
        lr=config.extension_lr(),
        p=config.train.p,
        alpha=config.extension.alpha,
        budget=config.extension.budget_fraction,
        nll_old=final.nll_old,
        nll_new=final.nll_new,
        run=run_dir.name,
    )


def tradeoff_table(run_dirs: Iterable[Path | str]) -> list[TradeoffRow]:
    """One row per run, sorted by method then learning rate.

    Raises:
        ContractError: If no run is given
        MetricsParseError: If a run's files are malformed
    """
    rows = [tradeoff_row(d) for d in run_dirs]
    if not rows:
        raise ContractError("tradeoff table needs at least one completed run")
    return sorted(rows, key=lambda r: (r.method, r.lr, r.p, r.alpha, r.budget, r.run))


def write_tradeoff_csv(rows: list[TradeoffRow], path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=TRADEOFF_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row.model_dump())
    return path
