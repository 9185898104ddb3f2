"""Tradeoff table formatters."""

import json

from rich.console import Console
from rich.table import Table

from nres.models import TradeoffRow


def format_tradeoff_table(rows: list[TradeoffRow]) -> None:
    """Format sweep results as an aligned rich table.

    Args:
        rows: Sorted TradeoffRow objects
    """
    console = Console()

    if not rows:
        console.print("[yellow]No completed runs found.[/yellow]")
        return

    table = Table(
        show_header=True,
        header_style="bold cyan",
        box=None,
        padding=(0, 1),
        pad_edge=False,
    )
    table.add_column("Method", style="bright_blue", no_wrap=True)
    table.add_column("LR", style="white", justify="right")
    table.add_column("p", style="white", justify="right")
    table.add_column("Alpha", style="white", justify="right")
    table.add_column("Budget", style="white", justify="right")
    table.add_column("NLL old", style="yellow", justify="right")
    table.add_column("NLL new", style="green", justify="right")
    table.add_column("Run", style="dim")

    for row in rows:
        table.add_row(
            row.method,
            f"{row.lr:.1e}",
            f"{row.p:g}",
            f"{row.alpha:g}",
            f"{row.budget:g}",
            f"{row.nll_old:.4f}",
            f"{row.nll_new:.4f}",
            row.run,
        )

    console.print(table)
    console.print(f"\n[dim]Total: {len(rows)} run(s)[/dim]")


def format_tradeoff_json(rows: list[TradeoffRow]) -> None:
    """Format sweep results as JSON."""
    data = [row.model_dump(mode="json") for row in rows]
    print(json.dumps({"runs": data, "count": len(rows)}, indent=2))
