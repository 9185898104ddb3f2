"""nres CLI - neutral-residue domain extension experiments."""

from typing import Optional

import typer
from typing_extensions import Annotated

from nres import __version__
from nres.commands import report, sweep, train
from nres.log import configure_logging


def version_callback(value: bool) -> None:
    """Callback for --version flag."""
    if value:
        typer.echo(f"nres version {__version__}")
        raise typer.Exit()


app = typer.Typer(
    help="nres - Extend a pretrained language model without forgetting",
    no_args_is_help=True,
)


@app.callback()
def main_callback(
    version: Annotated[
        Optional[bool],
        typer.Option(
            "--version",
            "-v",
            callback=version_callback,
            is_eager=True,
            help="Show version and exit",
        ),
    ] = None,
    verbose: Annotated[
        bool, typer.Option("--verbose", help="Show debug logging")
    ] = False,
) -> None:
    """nres - Extend a pretrained language model without forgetting."""
    configure_logging(verbose)


# Register commands
app.command("train-backbone")(train.train_backbone)
app.command("extend")(train.extend)
app.command("eval")(report.evaluate)
app.command("spectra")(report.spectra)
app.command("sweep")(sweep.sweep)


def main() -> None:
    """Entry point for the CLI."""
    app()


if __name__ == "__main__":
    main()
