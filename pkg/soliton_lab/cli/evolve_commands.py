"""Time evolution command."""

from typing import Any, Dict, Optional

import numpy as np
import typer

from .utils import handle_numerical_errors, load_config, write_results
from ..config import RunConfig
from ..evolve import default_dt, run
from ..exceptions import BlowUpError
from ..logging_config import get_logger
from ..models import Equation, EvolveConfig, PerturbationKind
from ..report_generator import ReportGenerator
from ..soliton import ProfileKind, SolitonProfile
from ..spectral import Field, hm_norm, translate
from ..stability import perturb

logger = get_logger(__name__)


def _exact_error(final: Field, profile: SolitonProfile, kind: ProfileKind, t: float) -> float:
    """H^1 distance to the traveling soliton e^{i omega t} profile(x - c t)."""
    exact = translate(profile.sample(final.grid, kind), profile.c * t)
    return hm_norm(final - exact * np.exp(1j * profile.omega * t), 1)


@handle_numerical_errors
def run_evolve(config: RunConfig) -> Dict[str, Any]:
    """Evolve a (perturbed) soliton and export the invariant time series.

    Raises:
        BlowUpError: After writing the outputs, if the run blew up
    """
    params = config.parameters.params
    wave = config.parameters.wave
    profile = SolitonProfile(wave.omega, wave.c, params)
    grid = config.grid.grid(profile.is_algebraic)
    block = config.evolve
    kind: ProfileKind = "dnls" if block.equation == Equation.DNLS else "gauge"

    experiment = config.experiment
    delta = experiment.delta or 0.0
    u0 = perturb(profile.sample(grid, kind), delta, experiment.kind, experiment.seed)
    evolve_config = EvolveConfig(
        equation=block.equation,
        dt=block.dt or default_dt(grid),
        t_final=block.t_final,
        snapshot_stride=block.snapshot_stride,
        b=params.b,
        edge_tolerance=profile.edge_tolerance,
        reference=wave,
    )
    trajectory = run(u0, evolve_config)

    summary: Dict[str, Any] = {
        "equation": block.equation.value,
        "b": params.b,
        "omega": wave.omega,
        "c": wave.c,
        "delta": delta,
        "dt": trajectory.dt,
        "t_final": block.t_final,
        "snapshots": len(trajectory.snapshots),
        "blew_up": trajectory.blew_up,
        "blowup_time": trajectory.blowup_time,
        "edge_ratio_max": trajectory.edge_ratio_max,
        "drift": trajectory.drift,
    }
    final = trajectory.final
    if delta == 0 and final.field is not None:
        summary["exact_solution_error"] = _exact_error(final.field, profile, kind, final.time)

    ReportGenerator().print_summary("Evolution", summary)
    out_dir = write_results(config, summary)
    trajectory.write(out_dir, dump_fields=config.output.dump_fields, binary=config.output.binary)
    if trajectory.blew_up:
        raise BlowUpError(
            f"Evolution blew up before T={block.t_final:g}",
            time=trajectory.blowup_time if trajectory.blowup_time is not None else float("nan"),
            last_state=final.field,
        )
    return summary


def register_evolve_commands(app: typer.Typer) -> None:
    """Attach the evolve command to the root app."""

    @app.command("evolve")
    def evolve_command(
        ctx: typer.Context,
        b: Optional[float] = typer.Option(None, "--b", help="Quintic coefficient b"),
        omega: Optional[float] = typer.Option(None, "--omega", help="Frequency"),
        c: Optional[float] = typer.Option(None, "--c", help="Velocity"),
        s: Optional[float] = typer.Option(None, "--s", help="Normalized velocity"),
        equation: Optional[Equation] = typer.Option(None, "--equation", help="dnls or gauge"),
        dt: Optional[float] = typer.Option(None, "--dt", help="Time step (default min(0.2 dx^2, 1e-3))"),
        t_final: Optional[float] = typer.Option(None, "--t-final", "-T", help="Final time"),
        stride: Optional[int] = typer.Option(None, "--stride", help="Steps between snapshots"),
        delta: Optional[float] = typer.Option(None, "--delta", help="H^1 size of the perturbation"),
        kind: Optional[PerturbationKind] = typer.Option(None, "--kind", help="Perturbation shape"),
        seed: Optional[int] = typer.Option(None, "--seed", help="Seed for random_smooth"),
        half_length: Optional[float] = typer.Option(None, "--half-length", "-L", help="Half window length"),
        n_points: Optional[int] = typer.Option(None, "--n-points", "-N", help="Grid size (power of two)"),
        dump_fields: Optional[bool] = typer.Option(None, "--dump-fields/--no-dump-fields", help="Write snapshot fields"),
        out: Optional[str] = typer.Option(None, "--out", help="Output directory"),
    ) -> None:
        """Evolve soliton data and record invariant drift."""
        config = load_config(
            ctx,
            "evolve",
            {
                "parameters": {"b": b, "omega": omega, "c": c, "s": s},
                "grid": {"half_length": half_length, "n_points": n_points},
                "evolve": {"equation": equation, "dt": dt, "t_final": t_final, "snapshot_stride": stride},
                "experiment": {"delta": delta, "kind": kind, "seed": seed},
                "output": {"out_dir": out, "dump_fields": dump_fields},
            },
        )
        run_evolve(config)
