"""Shared utilities for CLI commands."""

import functools
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import typer
from rich import print as rprint
from rich.console import Console

from ..config import RunConfig, resolve_run_config
from ..exceptions import (
    BlowUpError,
    ConfigurationError,
    ConvergenceError,
    EdgeDecayError,
    GridTooShortError,
    InadmissibleParametersError,
)
from ..logging_config import get_logger
from ..report_generator import SUMMARY_FILENAME, ReportGenerator

logger = get_logger(__name__)
console = Console()


def parse_float_list(text: str) -> List[float]:
    """Parse a comma-separated list of floats such as '0.9,0.99,0.999'.

    Raises:
        ConfigurationError: If an item is not a number
    """
    values = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            values.append(float(item))
        except ValueError:
            raise ConfigurationError(f"Not a number in list: {item!r}")
    if not values:
        raise ConfigurationError("Expected at least one number")
    return values


def config_path_from(ctx: Optional[typer.Context]) -> Optional[Path]:
    """--config value stored by the root callback."""
    if ctx is None:
        return None
    obj = ctx.find_root().obj or {}
    return obj.get("config_path")


def load_config(
    ctx: Optional[typer.Context],
    subcommand: str,
    overrides: Mapping[str, Mapping[str, Any]],
) -> RunConfig:
    return resolve_run_config(subcommand, config_path_from(ctx), overrides)


def handle_numerical_errors(func):
    """Decorator that prints actionable hints for known failures, then re-raises.

    Args:
        func: Function to wrap

    Returns:
        Wrapped function with error hints
    """

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except InadmissibleParametersError as e:
            if e.region is not None:
                rprint(
                    f"[yellow]Admissible velocities at omega={e.region.omega:g}: "
                    f"{e.region.describe_interval()}[/yellow]"
                )
            raise
        except EdgeDecayError as e:
            rprint(
                f"[yellow]Edge/peak ratio {e.ratio:.3e} exceeds {e.tolerance:.1e}[/yellow]"
            )
            rprint("[dim]Hint: increase --half-length (and --n-points with it)[/dim]")
            raise
        except GridTooShortError as e:
            rprint(
                f"[yellow]Truncated tail {e.tail_estimate:.3e} above {e.tolerance:.3e}[/yellow]"
            )
            rprint("[dim]Hint: use a longer window, e.g. --half-length 400 --n-points 16384[/dim]")
            raise
        except BlowUpError as e:
            rprint(f"[yellow]Blow-up near t={e.time:.6g}[/yellow]")
            rprint("[dim]Hint: reduce --dt or the perturbation size[/dim]")
            raise
        except ConvergenceError as e:
            rprint(
                f"[yellow]No convergence after {e.iterations} iterations "
                f"(residual {e.residual:.3e})[/yellow]"
            )
            raise

    return wrapper


def write_results(
    run_config: RunConfig,
    summary: Mapping[str, Any],
    files: Optional[Dict[str, str]] = None,
) -> Path:
    """Write the resolved config, summary.json and extra text files into the run directory.

    Returns:
        The output directory
    """
    out_dir = run_config.out_dir()
    generator = ReportGenerator()
    run_config.save(out_dir)
    generator.write_json(out_dir / SUMMARY_FILENAME, summary)
    for name, text in (files or {}).items():
        generator.write_text(out_dir / name, text)
    logger.info(f"Results written to {out_dir}")
    rprint(f"[dim]Results written to {out_dir}[/dim]")
    return out_dir
