"""Evaluation report formatters."""

import json

from rich.console import Console

from nres.models import EvalReport


def format_eval_detail(report: EvalReport, source: str = "") -> None:
    """Format an evaluation report with both domains side by side.

    Args:
        report: EvalReport to display
        source: Checkpoint the report was computed from
    """
    console = Console()

    console.print(
        f"\n[bold bright_blue]Evaluation at step {report.step}[/bold bright_blue]"
    )
    if source:
        console.print(f"[dim]Checkpoint: {source}[/dim]\n")

    console.print(
        f"[bold]Original domain:[/bold] nll {report.nll_old:.4f}  "
        f"ppl {report.ppl_old:.3f}"
    )
    console.print(
        f"[bold]New domain:[/bold]      nll {report.nll_new:.4f}  "
        f"ppl {report.ppl_new:.3f}"
    )

    if report.lm_loss is not None:
        console.print(f"\n[bold]LM loss:[/bold] {report.lm_loss:.4f}")
        console.print(f"[bold]Local l1:[/bold] {report.local_l1:.6f}")
        console.print(f"[bold]Local CE:[/bold] {report.local_ce:.6f}")


def format_eval_json(report: EvalReport) -> None:
    """Format an evaluation report as JSON."""
    print(json.dumps(report.model_dump(mode="json"), indent=2))
