"""Root Typer app: global options, subcommand registration and exit-code mapping."""

import sys
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console

from .evolve_commands import register_evolve_commands
from .report_commands import register_report_commands
from .soliton_commands import register_soliton_commands
from .stability_commands import register_stability_commands
from .variational_commands import register_variational_commands
from ..exceptions import SolitonLabError
from ..logging_config import get_logger, setup_logging

# Errors only until the callback knows the verbosity
setup_logging(verbosity=0)
logger = get_logger(__name__)

app = typer.Typer(
    help="Numerical lab for DNLS solitons with a quintic term",
    pretty_exceptions_enable=False,
    no_args_is_help=True,
)

for register in (
    register_soliton_commands,
    register_evolve_commands,
    register_stability_commands,
    register_variational_commands,
    register_report_commands,
):
    register(app)


@app.callback()
def main_callback(
    ctx: typer.Context,
    verbose: int = typer.Option(
        0,
        "-v",
        "--verbose",
        count=True,
        help="Increase verbosity (-v for info, -vv for debug)",
        is_eager=True,
    ),
    debug: bool = typer.Option(
        False,
        "--debug",
        help="Debug logging and tracebacks for unexpected errors",
        is_eager=True,
    ),
    config: Optional[Path] = typer.Option(
        None,
        "--config",
        help="INI file with run parameters; flags override its values",
    ),
) -> None:
    """Configure logging and stash the config path for subcommands."""
    setup_logging(verbosity=2 if debug else verbose)
    if config is not None:
        logger.debug(f"Run config file: {config}")
    ctx.obj = {"config_path": config}


def main():
    """Console-script entry point; maps lab errors to their exit codes."""
    console = Console()
    try:
        app()
    except SolitonLabError as e:
        console.print(f"[red]Error: {e}[/red]")
        logger.debug(f"{type(e).__name__} (exit {e.exit_code})", exc_info=True)
        sys.exit(e.exit_code)
    except Exception:
        if "--debug" in sys.argv:
            raise
        logger.exception("An unexpected error occurred")
        console.print("[bold red]An unexpected error occurred.[/bold red]")
        console.print("[dim]Rerun with --debug or check the run log for details.[/dim]")
        sys.exit(1)


if __name__ == "__main__":
    main()
