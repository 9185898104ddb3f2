"""Gating spectrum formatters."""

import json

from rich.console import Console
from rich.table import Table

from nres.models import SpectrumReport


def format_spectra_table(report: SpectrumReport) -> None:
    """Format gating spectra as a rich table, one row per matrix.

    Args:
        report: SpectrumReport to display
    """
    console = Console()

    if not report.matrices:
        console.print("[yellow]No gating matrices found.[/yellow]")
        return

    table = Table(
        show_header=True,
        header_style="bold cyan",
        box=None,
        padding=(0, 1),
        pad_edge=False,
    )
    table.add_column("Owner", style="bright_blue", no_wrap=True)
    table.add_column("Layer", style="white", justify="right")
    table.add_column("Rank", style="magenta", justify="right")
    table.add_column("Skewness*", style="yellow", justify="right")
    table.add_column("Leading values", style="dim")

    for m in report.matrices:
        table.add_row(
            m.owner,
            str(m.layer),
            str(len(m.values)),
            "zero matrix" if m.zero_matrix else f"{m.skewness:.4f}",
            m.format_head(),
        )

    console.print(table)
    for owner in ("backbone", "adapter"):
        mean = report.mean_skewness(owner)
        if mean is not None:
            console.print(f"[bold]Mean skewness ({owner}):[/bold] {mean:.4f}")
    console.print("\n[dim]* skewness = 1 - mean normalized singular value[/dim]")


def format_spectra_json(report: SpectrumReport) -> None:
    """Format gating spectra as JSON."""
    data = report.model_dump(mode="json")
    data["mean_skewness"] = {
        owner: report.mean_skewness(owner) for owner in ("backbone", "adapter")
    }
    print(json.dumps(data, indent=2))
