"""Orbital distance, perturbations and the stability and boundedness experiments."""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sp_fft
from scipy.optimize import brentq, minimize_scalar

from .evolve import Integrator, Trajectory, default_dt, run, step_count, take_snapshot
from .exceptions import BlowUpError, InadmissibleParametersError, ParameterError
from .functionals import gauge_G, jc, well_membership
from .logging_config import get_logger
from .models import (
    BoundReport,
    Equation,
    EvolveConfig,
    ModelParams,
    PerturbationKind,
    StabilityReport,
    WaveParams,
    WellTag,
)
from .params import mass_threshold, require_admissible
from .soliton import SolitonProfile, action_d
from .spectral import (
    EXPONENTIAL_EDGE_TOLERANCE,
    Field,
    SpectralGrid,
    check_edge_decay,
    default_grid,
    hm_norm,
    l2_norm,
    sobolev_pairing,
    translate,
)

logger = get_logger(__name__)

RANDOM_BAND = 8.0
RANDOM_ENVELOPE_WIDTH = 2.0
CORRIDOR_LADDER = (0.02, 0.05, 0.1, 0.2, 0.3, 0.5)


@dataclass
class OrbitFit:
    """Distance to the orbit {e^{i theta} q(. - y)} and the optimal (theta, y)."""

    distance: float
    theta: float
    y: float


def orbit_distance(u: Field, q: Field) -> OrbitFit:
    """inf over (theta, y) of ||u - e^{i theta} q(. - y)||_{H^1}.

    For fixed y the optimal phase is the argument of the complex H^1 pairing
    C(y) of u with q(. - y). |C| is sampled on all grid shifts by one inverse
    FFT; the best shift is refined by solving d|C|^2/dy = 0 within one cell.
    """
    grid = u.grid
    if u.max_abs == 0:
        return OrbitFit(distance=hm_norm(q, 1), theta=0.0, y=0.0)

    weights = 1.0 + grid.k**2
    cross = weights * u.spectrum * np.conj(q.spectrum)
    cross[grid.nyquist_index] = 0.0
    pairing = grid.dx * sp_fft.ifft(cross)
    index = int(np.argmax(np.abs(pairing)))
    if index >= grid.n_points // 2:
        index -= grid.n_points
    coarse = index * grid.dx

    k = grid.k

    def pairing_at(y: float) -> complex:
        return sobolev_pairing(u, translate(q, y), 1)

    def slope(y: float) -> float:
        phases = np.exp(1j * k * y)
        value = np.sum(cross * phases)
        derivative = np.sum(1j * k * cross * phases)
        return float((np.conj(value) * derivative).real)

    lo, hi = coarse - grid.dx, coarse + grid.dx
    if slope(lo) * slope(hi) < 0:
        y_opt = brentq(slope, lo, hi, xtol=1e-14 * max(1.0, abs(coarse)), maxiter=200)
    else:
        result = minimize_scalar(
            lambda y: -abs(pairing_at(y)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-6 * grid.dx},
        )
        y_opt = float(result.x)

    theta = float(np.angle(pairing_at(y_opt)))
    residual = u - translate(q, y_opt) * np.exp(1j * theta)
    return OrbitFit(distance=hm_norm(residual, 1), theta=theta, y=float(y_opt))


def orbital_distance(
    u: Field,
    omega: float,
    c: float,
    params: ModelParams,
    equation: Equation = Equation.DNLS,
) -> OrbitFit:
    """Orbital H^1 distance of u to the soliton of the given equation.

    Raises:
        InadmissibleParametersError: If (omega, c) admits no soliton
        EdgeDecayError: If u has not decayed at the window edges
    """
    profile = SolitonProfile(omega, c, params)
    check_edge_decay(u, profile.edge_tolerance)
    kind = "dnls" if equation == Equation.DNLS else "gauge"
    return orbit_distance(u, profile.sample(u.grid, kind))


def _bump(grid: SpectralGrid, profile: Field, kind: PerturbationKind, seed: int) -> Field:
    x = grid.x
    if kind == PerturbationKind.EVEN_BUMP:
        return Field(grid, np.exp(-x * x))
    if kind == PerturbationKind.ODD_BUMP:
        return Field(grid, x * np.exp(-x * x))
    if kind == PerturbationKind.SCALING:
        return profile
    rng = np.random.default_rng(seed)
    band = np.abs(grid.k) <= RANDOM_BAND
    coefficients = np.zeros(grid.n_points, dtype=np.complex128)
    count = int(band.sum())
    coefficients[band] = rng.standard_normal(count) + 1j * rng.standard_normal(count)
    envelope = np.exp(-0.5 * (x / RANDOM_ENVELOPE_WIDTH) ** 2)
    return Field(grid, envelope * sp_fft.ifft(coefficients))


def perturb(
    profile: Field, delta: float, kind: PerturbationKind, seed: int = 0
) -> Field:
    """Add a perturbation of H^1 norm delta to profile.

    ``scaling`` returns (1 + eta) profile with ||eta profile||_{H^1} = delta;
    ``random_smooth`` draws modes |k| <= 8 from a generator seeded with seed.
    """
    if delta < 0:
        raise ParameterError(f"delta must be non-negative, got {delta}")
    if delta == 0:
        return profile
    bump = _bump(profile.grid, profile, PerturbationKind(kind), seed)
    norm = hm_norm(bump, 1)
    if norm == 0:
        raise ParameterError("Cannot scale a vanishing perturbation")
    return profile + bump * (delta / norm)


@dataclass
class Corridor:
    """Bounds d(omega_l, c_l) < J_{c_l}(v) and J_{c_u}(v) < d(omega_u, c_u)."""

    epsilon: float
    lower: Tuple[float, float]
    upper: Tuple[float, float]
    d_lower: float
    d_upper: float

    def bounds(self, v: Field, c: float, params: ModelParams) -> Tuple[float, float, float]:
        """(low, J_c(v), high) with low < J_c(v) < high equivalent to the corridor.

        J at another velocity differs from J_c only by its L^4 term.
        """
        value = jc(v, c, params)
        low = self.d_lower - jc(v, self.lower[1], params) + value
        high = self.d_upper - jc(v, self.upper[1], params) + value
        return low, value, high


def _corridor_pairs(omega: float, c: float, eps: float):
    if c > 0:
        mu = math.sqrt(omega)
        s = c / (2.0 * mu)
        plus = ((mu + eps) ** 2, 2.0 * s * (mu + eps))
        minus = ((mu - eps) ** 2, 2.0 * s * (mu - eps)) if eps < mu else None
        return plus, minus
    if c == 0:
        return (omega, eps), (omega, -eps)
    minus = (omega - eps, c) if eps < omega else None
    return (omega + eps, c), minus


def calibrate_corridor(
    v0: Field, omega: float, c: float, params: ModelParams
) -> Optional[Corridor]:
    """Smallest ladder epsilon whose shifted wells hold v0 in B+ above and B- below."""
    for eps in CORRIDOR_LADDER:
        plus, minus = _corridor_pairs(omega, c, eps)
        if minus is None:
            continue
        for upper, lower in ((plus, minus), (minus, plus)):
            try:
                require_admissible(*upper, params)
                require_admissible(*lower, params)
            except InadmissibleParametersError:
                continue
            above = well_membership(v0, *upper, params, edge_tolerance=math.inf)
            below = well_membership(v0, *lower, params, edge_tolerance=math.inf)
            if above.b_plus and below.b_minus:
                logger.debug(f"Corridor epsilon {eps}: upper {upper}, lower {lower}")
                return Corridor(
                    epsilon=eps,
                    lower=lower,
                    upper=upper,
                    d_lower=action_d(*lower, params),
                    d_upper=action_d(*upper, params),
                )
    logger.info(f"No corridor epsilon on the ladder fits the data at ({omega}, {c})")
    return None


def stability_experiment(
    b: float,
    omega: float,
    c: float,
    delta: float,
    kind: PerturbationKind,
    t_final: float,
    equation: Equation = Equation.DNLS,
    seed: int = 0,
    grid: Optional[SpectralGrid] = None,
    dt: Optional[float] = None,
    snapshot_stride: int = 100,
    comoving: bool = True,
) -> StabilityReport:
    """Evolve a perturbed soliton and record its orbital distance over [0, t_final].

    With ``comoving`` the state is translated back by the fitted shift at each
    snapshot so that the soliton stays centered; reported shifts are cumulative.
    Potential-well checks run only for gamma > 0.

    Raises:
        InadmissibleParametersError: If (omega, c) admits no soliton for b
    """
    params = ModelParams(b=b)
    profile = SolitonProfile(omega, c, params)
    grid = grid or default_grid(profile.is_algebraic)
    sample_kind = "dnls" if equation == Equation.DNLS else "gauge"
    reference = profile.sample(grid, sample_kind)
    u0 = perturb(reference, delta, kind, seed)

    config = EvolveConfig(
        equation=equation,
        dt=dt or default_dt(grid),
        t_final=t_final,
        snapshot_stride=snapshot_stride,
        b=b,
        edge_tolerance=profile.edge_tolerance,
        reference=WaveParams(omega=omega, c=c),
    )
    check_edge_decay(u0, config.edge_tolerance)

    def gauge_form(state: Field) -> Field:
        if equation == Equation.GAUGE:
            return state
        return gauge_G(state, math.inf)

    report = StabilityReport(
        b=b,
        omega=omega,
        c=c,
        delta=delta,
        kind=kind,
        seed=seed,
        equation=equation,
        t_final=t_final,
    )
    corridor = None
    if params.gamma_sign > 0:
        v0 = gauge_form(u0)
        report.initial_well = well_membership(
            v0, omega, c, params, edge_tolerance=math.inf
        ).tag
        corridor = calibrate_corridor(v0, omega, c, params)
        report.corridor_epsilon = corridor.epsilon if corridor else None

    n_steps = step_count(t_final, config.dt)
    step_dt = t_final / n_steps
    integrator = Integrator(grid, config, step_dt)
    trajectory = Trajectory(config=config, dt=step_dt)
    offset = 0.0

    def record(state: Field, time: float) -> Field:
        nonlocal offset
        snap = take_snapshot(state, time, config, keep_field=False)
        trajectory.snapshots.append(snap)
        fit = orbit_distance(state, reference)
        report.times.append(time)
        report.distances.append(fit.distance)
        report.theta_opt.append(fit.theta)
        report.y_opt.append(offset + fit.y)
        report.nehari_signs.append(snap.invariants.nehari_sign)
        if corridor is not None:
            low, value, high = corridor.bounds(gauge_form(state), c, params)
            report.jc_values.append(value)
            report.corridor_lower.append(low)
            report.corridor_upper.append(high)
        else:
            report.jc_values.append(snap.invariants.jc)
            report.corridor_lower.append(None)
            report.corridor_upper.append(None)
        if comoving and fit.y != 0:
            offset += fit.y
            return translate(state, -fit.y)
        return state

    logger.info(
        f"Stability run b={b}, omega={omega}, c={c}, delta={delta}, kind={kind}, "
        f"T={t_final}, {n_steps} steps"
    )
    state = record(u0, 0.0)
    done = 0
    while done < n_steps:
        chunk = min(snapshot_stride, n_steps - done)
        try:
            state = integrator.advance(state, chunk, t0=done * step_dt)
        except BlowUpError as e:
            report.blew_up = True
            report.blowup_time = e.time
            logger.warning(f"Blow-up at t={e.time:.6g}: {e}")
            break
        done += chunk
        state = record(state, done * step_dt)

    report.drift = trajectory.drift
    report.edge_ratio_max = trajectory.edge_ratio_max
    if report.edge_ratio_max >= config.edge_tolerance:
        logger.warning(f"Edge leakage up to {report.edge_ratio_max:.3e} during the run")
    if not report.drift_valid:
        logger.warning(f"Invariant drift {report.drift} exceeds 1e-7; verdict is not reliable")
    if report.initial_well not in (WellTag.A_PLUS, WellTag.A_MINUS):
        logger.debug("Initial data is not in A+ or A-; Nehari sign check skipped")
    logger.info(f"Sup distance {report.sup_distance:.4e}, ratio {report.ratio:.4g}")
    return report


def response_ratio(coarse: StabilityReport, fine: StabilityReport) -> float:
    """Shrink factor of the sup distance between two runs differing only in delta."""
    return coarse.sup_distance / fine.sup_distance


def global_bound_experiment(
    b: float,
    u0: Field,
    t_final: float,
    dt: Optional[float] = None,
    snapshot_stride: int = 100,
    edge_tolerance: float = EXPONENTIAL_EDGE_TOLERANCE,
) -> BoundReport:
    """Evolve u0 under the DNLS equation and track its H^1 norm.

    Data at or above the mass threshold is still evolved; the report records
    the margin.
    """
    threshold = mass_threshold(b)
    mass = l2_norm(u0) ** 2
    if mass >= threshold:
        logger.warning(f"M(u0)={mass:.6g} is not below M*(b)={threshold:.6g}")

    config = EvolveConfig(
        equation=Equation.DNLS,
        dt=dt or default_dt(u0.grid),
        t_final=t_final,
        snapshot_stride=snapshot_stride,
        b=b,
        edge_tolerance=edge_tolerance,
    )
    trajectory = run(u0, config)
    norms = [hm_norm(s.field, 1) for s in trajectory.snapshots if s.field is not None]
    report = BoundReport(
        b=b,
        t_final=t_final,
        mass=mass,
        mass_threshold=threshold,
        times=trajectory.times,
        h1_norms=norms,
        blew_up=trajectory.blew_up,
        blowup_time=trajectory.blowup_time,
    )
    logger.info(
        f"Global bound run: mass margin {report.mass_margin:.4g}, sup H1 {report.sup_h1:.4g}"
    )
    return report


@dataclass
class StabilityJob:
    b: float
    omega: float
    c: float
    delta: float
    kind: PerturbationKind = PerturbationKind.EVEN_BUMP
    t_final: float = 20.0
    equation: Equation = Equation.DNLS
    seed: int = 0
    grid: Optional[SpectralGrid] = None
    dt: Optional[float] = None
    snapshot_stride: int = 100


def thread_count() -> int:
    """Worker cap from SOLITON_LAB_THREADS, defaulting to the CPU count."""
    raw = os.environ.get("SOLITON_LAB_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logger.warning(f"Ignoring non-integer SOLITON_LAB_THREADS={raw!r}")
    return max(1, os.cpu_count() or 1)


def run_sweep(
    jobs: Sequence[StabilityJob], max_workers: Optional[int] = None
) -> List[StabilityReport]:
    """Run independent stability experiments concurrently, results in job order."""
    workers = min(max_workers or thread_count(), max(1, len(jobs)))
    logger.info(f"Running {len(jobs)} stability jobs on {workers} threads")

    def execute(job: StabilityJob) -> StabilityReport:
        return stability_experiment(
            job.b,
            job.omega,
            job.c,
            job.delta,
            job.kind,
            job.t_final,
            equation=job.equation,
            seed=job.seed,
            grid=job.grid,
            dt=job.dt,
            snapshot_stride=job.snapshot_stride,
        )

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(execute, jobs))
