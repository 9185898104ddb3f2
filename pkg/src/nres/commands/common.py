"""Exit codes and option helpers shared by the commands."""

import sys
from typing import NoReturn

import typer
from pydantic import ValidationError

EXIT_USAGE = 2
EXIT_RUNTIME = 3


def validation_message(e: ValidationError) -> str:
    """First validation error with its dotted key path."""
    err = e.errors()[0]
    loc = ".".join(str(part) for part in err["loc"])
    return f"{loc}: {err['msg']}" if loc else err["msg"]


def fail(message: str, code: int) -> NoReturn:
    typer.echo(f"Error: {message}", err=True)
    sys.exit(code)
