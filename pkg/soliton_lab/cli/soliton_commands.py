"""Closed-form profile, invariant, Hessian, s* and algebraic-limit commands."""

from typing import Any, Dict, Optional

import typer

from .utils import handle_numerical_errors, load_config, parse_float_list, write_results
from ..config import RunConfig
from ..functionals import (
    RESIDUAL_KINDS,
    action_S,
    action_Scal,
    invariants_u,
    invariants_v,
    profile_invariants,
    profile_residual,
)
from ..logging_config import get_logger
from ..params import mass_threshold, s_star
from ..report_generator import ReportGenerator
from ..soliton import (
    SolitonProfile,
    closed_form_invariants,
    converge_to_algebraic,
    dmass_domega_closed,
    hessian_d,
    mass_closed,
    momentum_closed,
    momentum_sign_pattern,
)

logger = get_logger(__name__)


def _relative(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


@handle_numerical_errors
def run_profile(config: RunConfig) -> Dict[str, Any]:
    """Sample Phi and the gauge-form profile and record the closed-form invariants."""
    params = config.parameters.params
    wave = config.parameters.wave
    profile = SolitonProfile(wave.omega, wave.c, params)
    grid = config.grid.grid(profile.is_algebraic)
    logger.info(f"Sampling profile at omega={wave.omega}, c={wave.c}, b={params.b}")

    amplitude = profile.amplitude(grid.x)
    gauge = profile.gauge(grid.x)
    rows = [
        {"x": x, "phi": a, "re_varphi": g.real, "im_varphi": g.imag}
        for x, a, g in zip(grid.x, amplitude, gauge)
    ]
    generator = ReportGenerator()
    summary: Dict[str, Any] = {"region": profile.region.tag.value}
    summary.update(closed_form_invariants(wave.omega, wave.c, params).model_dump())
    generator.print_summary("Closed-form invariants", summary)
    csv_text = generator.format_as_csv(["x", "phi", "re_varphi", "im_varphi"], rows)
    write_results(config, summary, {"profile.csv": csv_text})
    return summary


@handle_numerical_errors
def run_invariants(config: RunConfig) -> Dict[str, Any]:
    """Compare quadrature invariants, residuals and actions with the closed forms."""
    params = config.parameters.params
    wave = config.parameters.wave
    profile = SolitonProfile(wave.omega, wave.c, params)
    grid = config.grid.grid(profile.is_algebraic)
    closed = closed_form_invariants(wave.omega, wave.c, params)
    quadrature = profile_invariants(profile, grid)

    summary: Dict[str, Any] = {
        "region": profile.region.tag.value,
        "half_length": grid.half_length,
        "n_points": grid.n_points,
    }
    for name in ("mass", "momentum", "energy"):
        exact = getattr(closed, name)
        approx = getattr(quadrature, name)
        summary[f"{name}_closed"] = exact
        summary[f"{name}_quadrature"] = approx
        summary[f"{name}_relative_error"] = _relative(approx, exact)
    for kind in RESIDUAL_KINDS:
        summary[f"residual_{kind}"] = profile_residual(profile, kind, grid)

    summary["action_d"] = closed.action_d
    if not profile.is_algebraic:
        dnls_field = profile.sample(grid, "dnls")
        gauge_field = profile.sample(grid, "gauge")
        summary["action_dnls"] = action_S(dnls_field, wave.omega, wave.c, params)
        summary["action_gauge"] = action_Scal(gauge_field, wave.omega, wave.c, params)
        u_record = invariants_u(dnls_field, params)
        v_record = invariants_v(gauge_field, params)
        summary["gauge_identity_gap"] = max(
            abs(u_record.energy - v_record.energy),
            abs(u_record.mass - v_record.mass),
            abs(u_record.momentum - v_record.momentum),
        )

    ReportGenerator().print_summary("Invariants", summary)
    write_results(config, summary)
    return summary


@handle_numerical_errors
def run_hessian(config: RunConfig) -> Dict[str, Any]:
    """Finite-difference Hessian of d against its closed-form determinant."""
    params = config.parameters.params
    wave = config.parameters.wave
    omega, c = wave.omega, wave.c
    result = hessian_d(omega, c, params, config.study.fd_step)

    step = 1e-6 * max(1.0, omega)
    dmass_fd = (mass_closed(omega + step, c, params) - mass_closed(omega - step, c, params)) / (
        2.0 * step
    )
    dmass = dmass_domega_closed(omega, c, params)
    summary = {
        "omega": omega,
        "c": c,
        "b": params.b,
        "h": result.h,
        "d_omega_omega": float(result.matrix[0, 0]),
        "d_omega_c": float(result.matrix[0, 1]),
        "d_c_c": float(result.matrix[1, 1]),
        "fd_det": result.fd_det,
        "closed_det": result.closed_det,
        "relative_error": result.relative_error,
        "momentum": momentum_closed(omega, c, params),
        "dmass_domega_fd": dmass_fd,
        "dmass_domega_closed": dmass,
        "half_dmass_relative_error": _relative(float(result.matrix[0, 0]), 0.5 * dmass),
    }
    ReportGenerator().print_summary("Hessian of d", summary)
    write_results(config, summary)
    return summary


@handle_numerical_errors
def run_sstar(config: RunConfig) -> Dict[str, Any]:
    """Momentum sign pattern over s and, for b > 0, the zero s*."""
    params = config.parameters.params
    n = config.study.samples
    sweep = momentum_sign_pattern(params.b, n)
    summary: Dict[str, Any] = {"b": params.b, "samples": n, "sign_changes": sweep.sign_changes}
    if params.b > 0:
        root = s_star(params.b)
        summary["s_star"] = root
        summary["momentum_at_s_star"] = momentum_closed(1.0, 2.0 * root, params)
    generator = ReportGenerator()
    generator.print_summary("Momentum sign pattern", summary)
    rows = [{"s": s, "momentum": p} for s, p in zip(sweep.s, sweep.momentum)]
    write_results(config, summary, {"momentum.csv": generator.format_as_csv(["s", "momentum"], rows)})
    return summary


@handle_numerical_errors
def run_threshold(config: RunConfig) -> Dict[str, Any]:
    """Mass threshold M*(b) for global boundedness."""
    b = config.parameters.b
    summary: Dict[str, Any] = {"b": b, "mass_threshold": mass_threshold(b)}
    if b > 0:
        summary["s_star"] = s_star(b)
    ReportGenerator().print_summary("Mass threshold", summary)
    write_results(config, summary)
    return summary


@handle_numerical_errors
def run_converge(config: RunConfig) -> Dict[str, Any]:
    """H^m distances of DNLS-gauge profiles to the algebraic soliton."""
    params = config.parameters.params
    s_list, m = config.study.s_values, config.study.sobolev_order
    grid = config.grid.grid(algebraic=True)
    study = converge_to_algebraic(s_list, m, grid, params)
    summary = {
        "b": params.b,
        "m": m,
        "s_values": list(study.s_values),
        "half_length": grid.half_length,
        "n_points": grid.n_points,
        "tail_estimate": study.tail_estimate,
        "strictly_decreasing": study.strictly_decreasing,
    }
    generator = ReportGenerator()
    generator.print_summary("Convergence to the algebraic soliton", summary)
    rows = [{"s": s, "distance": d} for s, d in zip(study.s_values, study.distances)]
    write_results(config, summary, {"converge.csv": generator.format_as_csv(["s", "distance"], rows)})
    return summary


def _wave_overrides(
    b: Optional[float], omega: Optional[float], c: Optional[float], s: Optional[float]
) -> Dict[str, Any]:
    return {"b": b, "omega": omega, "c": c, "s": s}


def register_soliton_commands(app: typer.Typer) -> None:
    """Attach the closed-form commands to the root app."""

    @app.command("profile")
    def profile_command(
        ctx: typer.Context,
        b: Optional[float] = typer.Option(None, "--b", help="Quintic coefficient b"),
        omega: Optional[float] = typer.Option(None, "--omega", help="Frequency"),
        c: Optional[float] = typer.Option(None, "--c", help="Velocity"),
        s: Optional[float] = typer.Option(None, "--s", help="Normalized velocity c/(2 sqrt(omega))"),
        half_length: Optional[float] = typer.Option(None, "--half-length", "-L", help="Half window length"),
        n_points: Optional[int] = typer.Option(None, "--n-points", "-N", help="Grid size (power of two)"),
        out: Optional[str] = typer.Option(None, "--out", help="Output directory"),
    ) -> None:
        """Write the sampled soliton profile and its closed-form invariants."""
        config = load_config(
            ctx,
            "profile",
            {
                "parameters": _wave_overrides(b, omega, c, s),
                "grid": {"half_length": half_length, "n_points": n_points},
                "output": {"out_dir": out},
            },
        )
        run_profile(config)

    @app.command("invariants")
    def invariants_command(
        ctx: typer.Context,
        b: Optional[float] = typer.Option(None, "--b", help="Quintic coefficient b"),
        omega: Optional[float] = typer.Option(None, "--omega", help="Frequency"),
        c: Optional[float] = typer.Option(None, "--c", help="Velocity"),
        s: Optional[float] = typer.Option(None, "--s", help="Normalized velocity"),
        half_length: Optional[float] = typer.Option(None, "--half-length", "-L", help="Half window length"),
        n_points: Optional[int] = typer.Option(None, "--n-points", "-N", help="Grid size (power of two)"),
        out: Optional[str] = typer.Option(None, "--out", help="Output directory"),
    ) -> None:
        """Compare quadrature invariants of the sampled soliton with the closed forms."""
        config = load_config(
            ctx,
            "invariants",
            {
                "parameters": _wave_overrides(b, omega, c, s),
                "grid": {"half_length": half_length, "n_points": n_points},
                "output": {"out_dir": out},
            },
        )
        run_invariants(config)

    @app.command("hessian")
    def hessian_command(
        ctx: typer.Context,
        b: Optional[float] = typer.Option(None, "--b", help="Quintic coefficient b"),
        omega: Optional[float] = typer.Option(None, "--omega", help="Frequency"),
        c: Optional[float] = typer.Option(None, "--c", help="Velocity"),
        s: Optional[float] = typer.Option(None, "--s", help="Normalized velocity"),
        h: Optional[float] = typer.Option(None, "--h", help="Finite-difference step"),
        out: Optional[str] = typer.Option(None, "--out", help="Output directory"),
    ) -> None:
        """Finite-difference Hessian of d(omega, c) against the closed-form determinant."""
        config = load_config(
            ctx,
            "hessian",
            {
                "parameters": _wave_overrides(b, omega, c, s),
                "study": {"fd_step": h},
                "output": {"out_dir": out},
            },
        )
        run_hessian(config)

    @app.command("sstar")
    def sstar_command(
        ctx: typer.Context,
        b: Optional[float] = typer.Option(None, "--b", help="Quintic coefficient b"),
        samples: Optional[int] = typer.Option(None, "--samples", "-n", help="Number of s samples (default 200)"),
        out: Optional[str] = typer.Option(None, "--out", help="Output directory"),
    ) -> None:
        """Sign pattern of the soliton momentum in s, and s* for b > 0."""
        config = load_config(
            ctx,
            "sstar",
            {"parameters": {"b": b}, "study": {"samples": samples}, "output": {"out_dir": out}},
        )
        run_sstar(config)

    @app.command("threshold")
    def threshold_command(
        ctx: typer.Context,
        b: Optional[float] = typer.Option(None, "--b", help="Quintic coefficient b"),
        out: Optional[str] = typer.Option(None, "--out", help="Output directory"),
    ) -> None:
        """Mass threshold below which solutions stay bounded."""
        config = load_config(
            ctx, "threshold", {"parameters": {"b": b}, "output": {"out_dir": out}}
        )
        run_threshold(config)

    @app.command("converge")
    def converge_command(
        ctx: typer.Context,
        b: Optional[float] = typer.Option(None, "--b", help="Quintic coefficient b"),
        s_values: Optional[str] = typer.Option(
            None, "--s", help="Comma-separated s values (default 0.9,0.99,0.999)"
        ),
        m: Optional[int] = typer.Option(None, "--m", help="Sobolev order 0, 1 or 2 (default 1)"),
        half_length: Optional[float] = typer.Option(None, "--half-length", "-L", help="Half window length"),
        n_points: Optional[int] = typer.Option(None, "--n-points", "-N", help="Grid size (power of two)"),
        out: Optional[str] = typer.Option(None, "--out", help="Output directory"),
    ) -> None:
        """Distances of the profiles at s < 1 to the algebraic soliton."""
        config = load_config(
            ctx,
            "converge",
            {
                "parameters": {"b": b},
                "grid": {"half_length": half_length, "n_points": n_points},
                "study": {
                    "s_values": parse_float_list(s_values) if s_values else None,
                    "sobolev_order": m,
                },
                "output": {"out_dir": out},
            },
        )
        run_converge(config)
