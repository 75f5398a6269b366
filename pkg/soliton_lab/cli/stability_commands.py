"""Stability experiment and global-boundedness commands."""

from pathlib import Path
from typing import Any, Dict, List, Optional

import typer
from rich import print as rprint

from .utils import handle_numerical_errors, load_config, parse_float_list, write_results
from ..config import RunConfig
from ..exceptions import BlowUpError
from ..logging_config import get_logger
from ..models import Equation, PerturbationKind, StabilityReport
from ..params import mass_threshold
from ..report_generator import SUMMARY_FILENAME, ReportGenerator
from ..soliton import SolitonProfile
from ..stability import StabilityJob, global_bound_experiment, response_ratio, run_sweep

logger = get_logger(__name__)

DEFAULT_DELTA = 1e-2


def _write_report(generator: ReportGenerator, directory: Path, report: StabilityReport) -> None:
    generator.write_json(directory / SUMMARY_FILENAME, generator.stability_summary(report))
    generator.write_text(directory / "series.csv", generator.stability_series_csv(report))


@handle_numerical_errors
def run_stability(config: RunConfig) -> List[StabilityReport]:
    """Run one stability experiment per delta; several deltas run concurrently.

    Raises:
        BlowUpError: After writing the outputs, if any run blew up
    """
    params = config.parameters.params
    wave = config.parameters.wave
    profile = SolitonProfile(wave.omega, wave.c, params)
    grid = config.grid.grid(profile.is_algebraic)
    experiment = config.experiment
    deltas = experiment.deltas or [
        experiment.delta if experiment.delta is not None else DEFAULT_DELTA
    ]

    jobs = [
        StabilityJob(
            b=params.b,
            omega=wave.omega,
            c=wave.c,
            delta=delta,
            kind=experiment.kind,
            t_final=experiment.horizon,
            equation=config.evolve.equation,
            seed=experiment.seed,
            grid=grid,
            dt=config.evolve.dt,
            snapshot_stride=config.evolve.snapshot_stride,
        )
        for delta in deltas
    ]
    reports = run_sweep(jobs)

    generator = ReportGenerator()
    out_dir = config.out_dir()
    if len(reports) == 1:
        generator.print_stability_report(reports[0])
        _write_report(generator, out_dir, reports[0])
    else:
        for index, report in enumerate(reports):
            generator.print_stability_report(report)
            _write_report(generator, out_dir / f"delta_{index:02d}", report)
        for coarse, fine in zip(reports, reports[1:]):
            rprint(
                f"[cyan]delta {coarse.delta:g} -> {fine.delta:g}: "
                f"sup distance shrinks by {response_ratio(coarse, fine):.3g}[/cyan]"
            )
    config.save(out_dir)
    rprint(f"[dim]Results written to {out_dir}[/dim]")

    failed = [r for r in reports if r.blew_up]
    if failed:
        first = min(failed, key=lambda r: r.blowup_time or 0.0)
        raise BlowUpError(
            f"{len(failed)} of {len(reports)} stability runs blew up (delta={first.delta:g})",
            time=first.blowup_time if first.blowup_time is not None else float("nan"),
        )
    return reports


@handle_numerical_errors
def run_bound(config: RunConfig) -> Dict[str, Any]:
    """Evolve a scaled soliton with mass fraction * M*(b) and check boundedness.

    Raises:
        BlowUpError: After writing the outputs, if the run blew up
    """
    mass_fraction = config.study.mass_fraction
    params = config.parameters.params
    wave = config.parameters.wave
    profile = SolitonProfile(wave.omega, wave.c, params)
    grid = config.grid.grid(profile.is_algebraic)
    u0 = profile.sample(grid, "dnls")
    threshold = mass_threshold(params.b)
    u0 = u0 * (mass_fraction * threshold / profile.mass) ** 0.5
    report = global_bound_experiment(
        params.b,
        u0,
        config.experiment.horizon,
        dt=config.evolve.dt,
        snapshot_stride=config.evolve.snapshot_stride,
        edge_tolerance=profile.edge_tolerance,
    )
    summary = report.model_dump(exclude={"times", "h1_norms"})
    generator = ReportGenerator()
    generator.print_summary("Global bound", summary)
    rows = [{"t": t, "h1": h} for t, h in zip(report.times, report.h1_norms)]
    write_results(config, summary, {"h1.csv": generator.format_as_csv(["t", "h1"], rows)})
    if report.blew_up:
        raise BlowUpError(
            f"Bound run at mass fraction {mass_fraction:g} blew up",
            time=report.blowup_time if report.blowup_time is not None else float("nan"),
        )
    return summary


def register_stability_commands(app: typer.Typer) -> None:
    """Attach the stability and bound commands to the root app."""

    @app.command("stability")
    def stability_command(
        ctx: typer.Context,
        b: Optional[float] = typer.Option(None, "--b", help="Quintic coefficient b"),
        omega: Optional[float] = typer.Option(None, "--omega", help="Frequency"),
        c: Optional[float] = typer.Option(None, "--c", help="Velocity"),
        s: Optional[float] = typer.Option(None, "--s", help="Normalized velocity"),
        delta: Optional[str] = typer.Option(
            None, "--delta", help="Perturbation size, or a comma-separated list for a sweep"
        ),
        kind: Optional[PerturbationKind] = typer.Option(None, "--kind", help="Perturbation shape"),
        seed: Optional[int] = typer.Option(None, "--seed", help="Seed for random_smooth"),
        horizon: Optional[float] = typer.Option(None, "--t-final", "-T", help="Time horizon"),
        equation: Optional[Equation] = typer.Option(None, "--equation", help="dnls or gauge"),
        dt: Optional[float] = typer.Option(None, "--dt", help="Time step"),
        stride: Optional[int] = typer.Option(None, "--stride", help="Steps between snapshots"),
        half_length: Optional[float] = typer.Option(None, "--half-length", "-L", help="Half window length"),
        n_points: Optional[int] = typer.Option(None, "--n-points", "-N", help="Grid size (power of two)"),
        out: Optional[str] = typer.Option(None, "--out", help="Output directory"),
    ) -> None:
        """Evolve a perturbed soliton and track its orbital distance."""
        deltas = parse_float_list(delta) if delta else None
        config = load_config(
            ctx,
            "stability",
            {
                "parameters": {"b": b, "omega": omega, "c": c, "s": s},
                "grid": {"half_length": half_length, "n_points": n_points},
                "evolve": {"equation": equation, "dt": dt, "snapshot_stride": stride},
                "experiment": {
                    "deltas": deltas,
                    "kind": kind,
                    "seed": seed,
                    "horizon": horizon,
                },
                "output": {"out_dir": out},
            },
        )
        run_stability(config)

    @app.command("bound")
    def bound_command(
        ctx: typer.Context,
        b: Optional[float] = typer.Option(None, "--b", help="Quintic coefficient b"),
        omega: Optional[float] = typer.Option(None, "--omega", help="Frequency of the seed profile"),
        c: Optional[float] = typer.Option(None, "--c", help="Velocity of the seed profile"),
        fraction: Optional[float] = typer.Option(
            None, "--fraction", help="Initial mass as a fraction of M*(b) (default 0.9)"
        ),
        horizon: Optional[float] = typer.Option(None, "--t-final", "-T", help="Time horizon"),
        dt: Optional[float] = typer.Option(None, "--dt", help="Time step"),
        out: Optional[str] = typer.Option(None, "--out", help="Output directory"),
    ) -> None:
        """Evolve soliton-shaped data below the mass threshold and check the H^1 bound."""
        config = load_config(
            ctx,
            "bound",
            {
                "parameters": {"b": b, "omega": omega, "c": c},
                "evolve": {"dt": dt},
                "experiment": {"horizon": horizon},
                "study": {"mass_fraction": fraction},
                "output": {"out_dir": out},
            },
        )
        run_bound(config)
