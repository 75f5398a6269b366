"""Sweep aggregation command."""

from pathlib import Path
from typing import Optional

import typer
from rich import print as rprint

from .utils import load_config
from ..config import RunConfig
from ..exceptions import ConfigurationError
from ..logging_config import get_logger
from ..models import ReportFormat
from ..report_generator import ReportGenerator

logger = get_logger(__name__)


def generate_report(config: RunConfig) -> Path:
    """Collect every summary.json below the configured directory into one table.

    The table goes to stdout and, with the resolved config, to the output
    directory (report.md for markdown, report.csv otherwise).

    Raises:
        ConfigurationError: If no directory is configured
    """
    if not config.report.directory:
        raise ConfigurationError("report needs a directory, as argument or [report] directory")
    directory = Path(config.report.directory)
    output_format = config.report.format
    generator = ReportGenerator()
    rows = generator.collect_summaries(directory)
    logger.info(f"Reporting {len(rows)} runs from {directory} as {output_format.value}")

    markdown = generator.format_summaries_as_markdown(rows)
    csv_text = generator.format_summaries_as_csv(rows)
    if output_format == ReportFormat.MARKDOWN:
        print(markdown)
    elif output_format == ReportFormat.CSV:
        print(csv_text, end="")
    else:
        generator.print_summaries(rows)
        if rows:
            rprint(f"[dim]{len(rows)} runs[/dim]")

    out_dir = config.out_dir()
    config.save(out_dir)
    if output_format == ReportFormat.MARKDOWN:
        generator.write_text(out_dir / "report.md", markdown + "\n")
    else:
        generator.write_text(out_dir / "report.csv", csv_text)
    return out_dir


def register_report_commands(app: typer.Typer) -> None:
    """Attach the report command to the root app."""

    @app.command("report")
    def report_command(
        ctx: typer.Context,
        directory: Optional[Path] = typer.Argument(None, help="Directory holding run outputs"),
        output_format: Optional[ReportFormat] = typer.Option(
            None, "--format", "-f", help="terminal, markdown or csv"
        ),
        out: Optional[str] = typer.Option(None, "--out", help="Output directory"),
    ) -> None:
        """Aggregate summary.json files of a sweep."""
        config = load_config(
            ctx,
            "report",
            {
                "report": {
                    "directory": str(directory) if directory is not None else None,
                    "format": output_format,
                },
                "output": {"out_dir": out},
            },
        )
        generate_report(config)
