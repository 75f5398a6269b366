"""Result formatting: CSV tables, JSON summaries, Rich tables and sweep aggregation."""

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Sequence

from rich import print as rprint
from rich.console import Console
from rich.table import Table

from .exceptions import OutputError
from .logging_config import get_logger
from .models import StabilityReport

logger = get_logger(__name__)

SUMMARY_FILENAME = "summary.json"


def format_float(value: Any) -> str:
    """17 significant digits for floats, str() for everything else."""
    if isinstance(value, float):
        return format(value, ".17g")
    if value is None:
        return ""
    return str(value)


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


class ReportGenerator:
    """Render results to files and to the terminal."""

    def __init__(self):
        self.console = Console()

    def format_as_csv(self, fieldnames: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> str:
        """CSV with RFC-4180 quoting and 17-digit floats."""
        output = io.StringIO()
        writer = csv.DictWriter(
            output, fieldnames=list(fieldnames), lineterminator="\n", extrasaction="ignore"
        )
        writer.writeheader()
        for row in rows:
            writer.writerow({key: format_float(row.get(key)) for key in fieldnames})
        return output.getvalue()

    def format_as_json(self, data: Mapping[str, Any]) -> str:
        """UTF-8 JSON, keys in insertion order, shortest round-trip floats."""
        return json.dumps(_json_safe(dict(data)), indent=2, ensure_ascii=False) + "\n"

    def write_text(self, path: Path, text: str) -> Path:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
        except OSError as e:
            raise OutputError(f"Cannot write {path}: {e}", original_error=e)
        logger.debug(f"Wrote {path}")
        return path

    def write_json(self, path: Path, data: Mapping[str, Any]) -> Path:
        return self.write_text(path, self.format_as_json(data))

    def print_summary(self, title: str, data: Mapping[str, Any]) -> None:
        """Two-column table of scalar results."""
        table = Table(title=title, show_header=True, header_style="bold magenta")
        table.add_column("Quantity", style="cyan")
        table.add_column("Value", justify="right", style="green")
        for key, value in data.items():
            if isinstance(value, (list, dict)):
                continue
            shown = f"{value:.10g}" if isinstance(value, float) else str(value)
            table.add_row(key, shown)
        self.console.print(table)

    def stability_summary(self, report: StabilityReport) -> Dict[str, Any]:
        """Parameters, verdicts and drift of one stability run."""
        return {
            "b": report.b,
            "omega": report.omega,
            "c": report.c,
            "delta": report.delta,
            "kind": report.kind.value,
            "seed": report.seed,
            "equation": report.equation.value,
            "t_final": report.t_final,
            "sup_distance": report.sup_distance,
            "ratio": report.ratio,
            "blew_up": report.blew_up,
            "blowup_time": report.blowup_time,
            "drift_valid": report.drift_valid,
            "drift": dict(report.drift),
            "edge_ratio_max": report.edge_ratio_max,
            "initial_well": report.initial_well.value,
            "nehari_sign_constant": report.nehari_sign_constant,
            "corridor_epsilon": report.corridor_epsilon,
            "corridor_ok": report.corridor_ok,
        }

    def stability_series_csv(self, report: StabilityReport) -> str:
        fieldnames = ["t", "distance", "theta_opt", "y_opt", "K_sign", "jc", "jc_lower", "jc_upper"]
        rows = [
            {
                "t": t,
                "distance": d,
                "theta_opt": theta,
                "y_opt": y,
                "K_sign": sign,
                "jc": value,
                "jc_lower": low,
                "jc_upper": high,
            }
            for t, d, theta, y, sign, value, low, high in zip(
                report.times,
                report.distances,
                report.theta_opt,
                report.y_opt,
                report.nehari_signs,
                report.jc_values,
                report.corridor_lower,
                report.corridor_upper,
            )
        ]
        return self.format_as_csv(fieldnames, rows)

    def print_stability_report(self, report: StabilityReport) -> None:
        summary = self.stability_summary(report)
        self.print_summary("Stability run", summary)
        if report.blew_up:
            rprint("[bold red]Blow-up detected[/bold red]")
        elif not report.drift_valid:
            rprint("[yellow]Invariant drift above 1e-7: verdict is not reliable[/yellow]")
        elif report.ratio <= 10:
            rprint(f"[green]Orbit stayed within {report.ratio:.3g} x delta[/green]")
        else:
            rprint(f"[yellow]Sup distance is {report.ratio:.3g} x delta[/yellow]")

    def collect_summaries(self, directory: Path) -> List[Dict[str, Any]]:
        """Every summary.json below directory, in sorted path order."""
        if not directory.is_dir():
            raise OutputError(f"Sweep directory {directory} does not exist")
        rows = []
        for path in sorted(directory.rglob(SUMMARY_FILENAME)):
            try:
                data = json.loads(path.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as e:
                logger.warning(f"Skipping unreadable summary {path}: {e}")
                continue
            row = {"run": str(path.parent.relative_to(directory))}
            row.update({k: v for k, v in data.items() if not isinstance(v, (dict, list))})
            rows.append(row)
        logger.debug(f"Collected {len(rows)} summaries from {directory}")
        return rows

    @staticmethod
    def summary_columns(rows: Sequence[Mapping[str, Any]]) -> List[str]:
        columns: List[str] = []
        for row in rows:
            for key in row:
                if key not in columns:
                    columns.append(key)
        return columns

    def print_summaries(self, rows: Sequence[Mapping[str, Any]]) -> None:
        if not rows:
            rprint("[yellow]No summaries found[/yellow]")
            return
        columns = self.summary_columns(rows)
        table = Table(title="Sweep summary", show_header=True, header_style="bold magenta")
        for column in columns:
            table.add_column(column, style="cyan" if column == "run" else None)
        for row in rows:
            cells = []
            for column in columns:
                value = row.get(column)
                cells.append(f"{value:.6g}" if isinstance(value, float) else format_float(value))
            table.add_row(*cells)
        self.console.print(table)

    def format_summaries_as_markdown(self, rows: Sequence[Mapping[str, Any]]) -> str:
        lines = ["# Sweep Summary", ""]
        if not rows:
            lines.append("*No summaries found*")
            return "\n".join(lines)
        columns = self.summary_columns(rows)
        lines.append("| " + " | ".join(columns) + " |")
        lines.append("| " + " | ".join(":---" for _ in columns) + " |")
        for row in rows:
            lines.append("| " + " | ".join(format_float(row.get(c)) for c in columns) + " |")
        return "\n".join(lines)

    def format_summaries_as_csv(self, rows: Sequence[Mapping[str, Any]]) -> str:
        return self.format_as_csv(self.summary_columns(rows), rows)
