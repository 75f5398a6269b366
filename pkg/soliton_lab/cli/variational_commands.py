"""Variational commands: Nehari and mass-constrained minimization."""

from typing import Any, Dict, Optional

import typer

from .utils import handle_numerical_errors, load_config, write_results
from ..config import RunConfig
from ..exceptions import ConvergenceError
from ..logging_config import get_logger
from ..report_generator import ReportGenerator
from ..soliton import SolitonProfile, action_d, mass_closed
from ..spectral import write_field
from ..stability import orbit_distance
from ..variational import (
    gn_constants,
    mass_constrained_minimize,
    mass_constrained_value_closed,
    nehari_minimize,
    sharp_gn_ratio,
)

logger = get_logger(__name__)


def _history_csv(generator: ReportGenerator, history) -> str:
    rows = [{"iteration": i, "value": v} for i, v in enumerate(history)]
    return generator.format_as_csv(["iteration", "value"], rows)


def _require_converged(result, label: str) -> None:
    if not result.converged:
        raise ConvergenceError(
            f"{label} stopped at the iteration cap",
            iterations=result.iterations,
            residual=result.residual,
        )


@handle_numerical_errors
def run_nehari(config: RunConfig) -> Dict[str, Any]:
    """Minimize the action on the Nehari manifold and compare with d(omega, c).

    Raises:
        ConvergenceError: After writing the outputs, if the descent did not converge
    """
    solver = config.solver
    params = config.parameters.params
    wave = config.parameters.wave
    profile = SolitonProfile(wave.omega, wave.c, params)
    grid = config.grid.grid(profile.is_algebraic)

    result = nehari_minimize(
        wave.omega, wave.c, params, max_iters=solver.max_iters, tol=solver.tol, grid=grid
    )
    closed = action_d(wave.omega, wave.c, params)
    fit = orbit_distance(result.minimizer, profile.sample(grid, "gauge"))

    summary: Dict[str, Any] = {"b": params.b, "omega": wave.omega, "c": wave.c}
    summary.update(result.summary())
    summary["action_d"] = closed
    summary["relative_error"] = abs(result.value - closed) / abs(closed)
    summary["orbit_distance"] = fit.distance
    summary["orbit_shift"] = fit.y

    generator = ReportGenerator()
    generator.print_summary("Nehari minimization", summary)
    out_dir = write_results(config, summary, {"history.csv": _history_csv(generator, result.history)})
    binary = config.output.binary
    write_field(result.minimizer, out_dir / ("minimizer.bin" if binary else "minimizer.csv"), binary)
    _require_converged(result, "Nehari descent")
    return summary


@handle_numerical_errors
def run_massmin(config: RunConfig) -> Dict[str, Any]:
    """Minimize E_c at fixed mass and check the value against the soliton family.

    Raises:
        ConvergenceError: After writing the outputs, if the flow did not converge
    """
    solver = config.solver
    mass = solver.mass
    params = config.parameters.params
    wave = config.parameters.wave
    c = wave.c
    if mass is None:
        mass = mass_closed(wave.omega, c, params)
    grid = config.grid.grid()

    result = mass_constrained_minimize(
        c, mass, params, max_iters=solver.max_iters, tol=solver.tol, grid=grid
    )
    closed_value, closed_omega = mass_constrained_value_closed(c, mass, params)
    constants = gn_constants(grid)
    reference = SolitonProfile(closed_omega, c, params).sample(grid, "amplitude")
    fit = orbit_distance(result.minimizer, reference)

    summary: Dict[str, Any] = {"b": params.b, "c": c, "mass": mass}
    summary.update(result.summary())
    summary["closed_value"] = closed_value
    summary["closed_omega"] = closed_omega
    summary["relative_error"] = abs(result.value - closed_value) / abs(closed_value)
    summary["gn_c1"] = constants.c1
    summary["gn_c2"] = constants.c2
    summary["gn_family"] = constants.best_family
    summary["gn_lower_bound"] = -constants.c2 * c * c * mass**3
    summary["orbit_distance"] = fit.distance
    if params.gamma_sign > 0:
        summary["sharp_gn_ratio"] = sharp_gn_ratio(result.minimizer, params)

    generator = ReportGenerator()
    generator.print_summary("Mass-constrained minimization", summary)
    out_dir = write_results(config, summary, {"history.csv": _history_csv(generator, result.history)})
    binary = config.output.binary
    write_field(result.minimizer, out_dir / ("minimizer.bin" if binary else "minimizer.csv"), binary)
    _require_converged(result, "Mass-constrained flow")
    return summary


def register_variational_commands(app: typer.Typer) -> None:
    """Attach the nehari and massmin commands to the root app."""

    @app.command("nehari")
    def nehari_command(
        ctx: typer.Context,
        b: Optional[float] = typer.Option(None, "--b", help="Quintic coefficient b"),
        omega: Optional[float] = typer.Option(None, "--omega", help="Frequency"),
        c: Optional[float] = typer.Option(None, "--c", help="Velocity"),
        s: Optional[float] = typer.Option(None, "--s", help="Normalized velocity"),
        max_iters: Optional[int] = typer.Option(None, "--max-iters", help="Iteration cap (default 20000)"),
        tol: Optional[float] = typer.Option(None, "--tol", help="Residual tolerance (default 1e-8)"),
        half_length: Optional[float] = typer.Option(None, "--half-length", "-L", help="Half window length"),
        n_points: Optional[int] = typer.Option(None, "--n-points", "-N", help="Grid size (power of two)"),
        binary: Optional[bool] = typer.Option(None, "--binary/--csv", help="Minimizer dump format"),
        out: Optional[str] = typer.Option(None, "--out", help="Output directory"),
    ) -> None:
        """Minimize the action on the Nehari manifold (gamma > 0)."""
        config = load_config(
            ctx,
            "nehari",
            {
                "parameters": {"b": b, "omega": omega, "c": c, "s": s},
                "grid": {"half_length": half_length, "n_points": n_points},
                "solver": {"max_iters": max_iters, "tol": tol},
                "output": {"out_dir": out, "binary": binary},
            },
        )
        run_nehari(config)

    @app.command("massmin")
    def massmin_command(
        ctx: typer.Context,
        b: Optional[float] = typer.Option(None, "--b", help="Quintic coefficient b"),
        c: Optional[float] = typer.Option(None, "--c", help="Velocity, must be negative"),
        mass: Optional[float] = typer.Option(
            None, "--mass", "-m", help="Prescribed mass (default: mass of the soliton at --omega)"
        ),
        omega: Optional[float] = typer.Option(None, "--omega", help="Frequency used for the default mass"),
        max_iters: Optional[int] = typer.Option(None, "--max-iters", help="Iteration cap (default 20000)"),
        tol: Optional[float] = typer.Option(None, "--tol", help="Residual tolerance (default 1e-8)"),
        half_length: Optional[float] = typer.Option(None, "--half-length", "-L", help="Half window length"),
        n_points: Optional[int] = typer.Option(None, "--n-points", "-N", help="Grid size (power of two)"),
        binary: Optional[bool] = typer.Option(None, "--binary/--csv", help="Minimizer dump format"),
        out: Optional[str] = typer.Option(None, "--out", help="Output directory"),
    ) -> None:
        """Minimize E_c at fixed mass (c < 0) and compare with the soliton family."""
        config = load_config(
            ctx,
            "massmin",
            {
                "parameters": {"b": b, "omega": omega, "c": c},
                "grid": {"half_length": half_length, "n_points": n_points},
                "solver": {"max_iters": max_iters, "tol": tol, "mass": mass},
                "output": {"out_dir": out, "binary": binary},
            },
        )
        run_massmin(config)
