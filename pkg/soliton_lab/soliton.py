"""Closed-form soliton profiles, invariants and action, and the algebraic-limit study."""

import math
from dataclasses import dataclass
from typing import Callable, List, Literal, Sequence

import numpy as np

from .exceptions import GridTooShortError, InadmissibleParametersError, ParameterError
from .logging_config import get_logger
from .models import ClosedFormInvariants, ModelParams, ParamRegion, RegionTag, WaveParams
from .params import require_admissible, s_star_lower
from .spectral import (
    ALGEBRAIC_EDGE_TOLERANCE,
    EXPONENTIAL_EDGE_TOLERANCE,
    Field,
    SpectralGrid,
    edge_taper,
    hm_norm,
)

logger = get_logger(__name__)

ProfileKind = Literal["amplitude", "gauge", "dnls"]

ArrayLike = np.ndarray | float


class SolitonProfile:
    """Closed-form evaluators for one soliton.

    ``amplitude`` is the real even profile Phi, ``gauge`` is
    e^{icx/2} Phi (the soliton of the gauge-form equation) and ``dnls`` is the
    soliton of the DNLS equation, which carries the extra phase
    -(1/4) int_{-inf}^x Phi^2.
    """

    def __init__(self, omega: float, c: float, params: ModelParams):
        self.region: ParamRegion = require_admissible(omega, c, params)
        self.omega = omega
        self.c = c
        self.params = params
        self.gamma = params.gamma
        self.discriminant = max(4.0 * omega - c * c, 0.0)
        self.kappa = math.sqrt(self.discriminant)
        self.radius = math.sqrt(c * c + self.gamma * self.discriminant)
        self.mass = mass_closed(omega, c, params)

    @property
    def wave(self) -> WaveParams:
        return WaveParams(omega=self.omega, c=self.c)

    @property
    def is_algebraic(self) -> bool:
        return self.region.is_algebraic

    @property
    def edge_tolerance(self) -> float:
        if self.is_algebraic:
            return ALGEBRAIC_EDGE_TOLERANCE
        return EXPONENTIAL_EDGE_TOLERANCE

    def phi_squared(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        c, gamma = self.c, self.gamma
        if self.is_algebraic:
            return 4.0 * c / ((c * x) ** 2 + gamma)
        decay = np.exp(-self.kappa * np.abs(x))
        return (
            4.0 * self.discriminant * decay
            / (self.radius * (1.0 + decay**2) - 2.0 * c * decay)
        )

    def cumulative_mass(self, x: ArrayLike) -> np.ndarray:
        """Exact antiderivative int_{-inf}^x Phi^2."""
        x = np.asarray(x, dtype=float)
        c, gamma = self.c, self.gamma
        if self.is_algebraic:
            root = math.sqrt(gamma)
            return (4.0 / root) * (np.arctan(c * x / root) + 0.5 * math.pi)

        t = np.tanh(0.5 * self.kappa * x)
        alpha = c / self.radius
        sign = self.params.gamma_sign
        if sign > 0:
            odd_part = (4.0 / math.sqrt(gamma)) * np.arctan(
                math.sqrt((1.0 + alpha) / (1.0 - alpha)) * t
            )
        elif sign == 0:
            odd_part = 2.0 * self.kappa * t / abs(c)
        else:
            odd_part = (4.0 / math.sqrt(-gamma)) * np.arctanh(
                math.sqrt((-1.0 - alpha) / (1.0 - alpha)) * t
            )
        return 0.5 * self.mass + odd_part

    def amplitude(self, x: ArrayLike) -> np.ndarray:
        return np.sqrt(self.phi_squared(x))

    def gauge(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.exp(0.5j * self.c * x) * self.amplitude(x)

    def dnls(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        phase = 0.5 * self.c * x - 0.25 * self.cumulative_mass(x)
        return np.exp(1j * phase) * self.amplitude(x)

    def evaluator(self, kind: ProfileKind) -> Callable[[ArrayLike], np.ndarray]:
        if kind == "amplitude":
            return self.amplitude
        if kind == "gauge":
            return self.gauge
        if kind == "dnls":
            return self.dnls
        raise ParameterError(f"Unknown profile kind: {kind}")

    def sample(self, grid: SpectralGrid, kind: ProfileKind = "gauge") -> Field:
        return Field(grid, self.evaluator(kind)(grid.x))


def phi_squared(omega: float, c: float, params: ModelParams, x: ArrayLike) -> np.ndarray:
    return SolitonProfile(omega, c, params).phi_squared(x)


def profile_phi(omega: float, c: float, params: ModelParams):
    return SolitonProfile(omega, c, params).amplitude


def profile_varphi(omega: float, c: float, params: ModelParams):
    return SolitonProfile(omega, c, params).gauge


def profile_dnls(omega: float, c: float, params: ModelParams):
    return SolitonProfile(omega, c, params).dnls


def _alpha(omega: float, c: float, gamma: float) -> float:
    return c / math.sqrt(c * c + gamma * max(4.0 * omega - c * c, 0.0))


def mass_closed(omega: float, c: float, params: ModelParams) -> float:
    """Mass of the soliton from the three-branch closed form."""
    region = require_admissible(omega, c, params)
    gamma = params.gamma
    if region.is_algebraic:
        return 4.0 * math.pi / math.sqrt(gamma)

    alpha = _alpha(omega, c, gamma)
    sign = params.gamma_sign
    if sign > 0:
        return (8.0 / math.sqrt(gamma)) * math.atan(
            math.sqrt((1.0 + alpha) / (1.0 - alpha))
        )
    if sign == 0:
        return 4.0 * math.sqrt(4.0 * omega - c * c) / (-c)
    return (4.0 / math.sqrt(-gamma)) * math.log(-alpha + math.sqrt(alpha * alpha - 1.0))


def dmass_domega_closed(omega: float, c: float, params: ModelParams) -> float:
    """Partial derivative of the mass in omega (interior only)."""
    region = require_admissible(omega, c, params)
    if region.tag != RegionTag.EXPONENTIAL_INTERIOR:
        raise InadmissibleParametersError(
            "The mass derivative is singular on the algebraic boundary",
            region=region,
        )
    discriminant = 4.0 * omega - c * c
    return -8.0 * c / (
        math.sqrt(discriminant) * (c * c + params.gamma * discriminant)
    )


def momentum_closed(omega: float, c: float, params: ModelParams) -> float:
    mass = mass_closed(omega, c, params)
    gamma = params.gamma
    root = math.sqrt(max(4.0 * omega - c * c, 0.0))
    if params.gamma_sign == 0:
        return -((2.0 * omega + c * c) / (3.0 * c)) * mass
    return 0.5 * c * (-1.0 + 1.0 / gamma) * mass + (2.0 / gamma) * root


def energy_closed(omega: float, c: float, params: ModelParams) -> float:
    """Energy via the identity E(phi_{1,2s}) = -(s/2) P(phi_{1,2s}) and omega scaling."""
    require_admissible(omega, c, params)
    s = c / (2.0 * math.sqrt(omega))
    return -omega * 0.5 * s * momentum_closed(1.0, 2.0 * s, params)


def action_d(omega: float, c: float, params: ModelParams) -> float:
    """d(omega, c) = omega (M(phi_{1,2s}) + s P(phi_{1,2s})) / 2."""
    require_admissible(omega, c, params)
    s = c / (2.0 * math.sqrt(omega))
    unit_mass = mass_closed(1.0, 2.0 * s, params)
    unit_momentum = momentum_closed(1.0, 2.0 * s, params)
    return 0.5 * omega * (unit_mass + s * unit_momentum)


def closed_form_invariants(
    omega: float, c: float, params: ModelParams
) -> ClosedFormInvariants:
    require_admissible(omega, c, params)
    return ClosedFormInvariants(
        omega=omega,
        c=c,
        gamma=params.gamma,
        mass=mass_closed(omega, c, params),
        momentum=momentum_closed(omega, c, params),
        energy=energy_closed(omega, c, params),
        action_d=action_d(omega, c, params),
        alpha=_alpha(omega, c, params.gamma),
    )


@dataclass
class HessianResult:
    """Finite-difference Hessian of d(omega, c) and the closed-form determinant."""

    omega: float
    c: float
    h: float
    matrix: np.ndarray
    closed_det: float

    @property
    def fd_det(self) -> float:
        return float(np.linalg.det(self.matrix))

    @property
    def relative_error(self) -> float:
        return abs(self.fd_det - self.closed_det) / abs(self.closed_det)


def hessian_det_closed(omega: float, c: float, params: ModelParams) -> float:
    discriminant = 4.0 * omega - c * c
    momentum = momentum_closed(omega, c, params)
    return -2.0 * momentum / (
        math.sqrt(discriminant) * (c * c + params.gamma * discriminant)
    )


def hessian_d(
    omega: float, c: float, params: ModelParams, h: float | None = None
) -> HessianResult:
    """Central second differences of action_d around (omega, c).

    Raises:
        InadmissibleParametersError: If a stencil point leaves the interior
    """
    region = require_admissible(omega, c, params)
    if region.tag != RegionTag.EXPONENTIAL_INTERIOR:
        raise InadmissibleParametersError(
            "The Hessian of d needs omega > c^2/4 strictly", region=region
        )
    if h is None:
        h = 1e-4 * max(1.0, omega)

    values = {}
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            point = (omega + i * h, c + j * h)
            stencil_region = require_admissible(point[0], point[1], params)
            if stencil_region.tag != RegionTag.EXPONENTIAL_INTERIOR:
                raise InadmissibleParametersError(
                    f"Hessian stencil point {point} leaves the interior; reduce h",
                    region=stencil_region,
                )
            values[(i, j)] = action_d(point[0], point[1], params)

    d_ww = (values[(1, 0)] - 2.0 * values[(0, 0)] + values[(-1, 0)]) / h**2
    d_cc = (values[(0, 1)] - 2.0 * values[(0, 0)] + values[(0, -1)]) / h**2
    d_wc = (
        values[(1, 1)] - values[(1, -1)] - values[(-1, 1)] + values[(-1, -1)]
    ) / (4.0 * h**2)
    matrix = np.array([[d_ww, d_wc], [d_wc, d_cc]])
    result = HessianResult(
        omega=omega,
        c=c,
        h=h,
        matrix=matrix,
        closed_det=hessian_det_closed(omega, c, params),
    )
    logger.debug(
        f"Hessian at ({omega}, {c}): fd_det={result.fd_det:.10g}, "
        f"closed={result.closed_det:.10g}"
    )
    return result


def sup_norm_sq(s: float, params: ModelParams) -> float:
    """Squared sup norm of Phi_{1,2s}, attained at x = 0."""
    if params.gamma_sign <= 0:
        raise ParameterError("sup_norm_sq needs gamma > 0")
    if not -1.0 < s <= 1.0:
        raise ParameterError(f"s must lie in (-1, 1], got {s}")
    gamma = params.gamma
    return (4.0 / gamma) * (math.sqrt(s * s + gamma * (1.0 - s * s)) + s)


@dataclass
class MomentumSweep:
    """Samples of s -> P(phi_{1,2s}) over the admissible s-interval."""

    b: float
    s: np.ndarray
    momentum: np.ndarray

    @property
    def sign_changes(self) -> List[float]:
        signs = np.sign(self.momentum)
        flips = np.nonzero(signs[1:] != signs[:-1])[0]
        return [float(0.5 * (self.s[i] + self.s[i + 1])) for i in flips]


def admissible_s_interval(params: ModelParams) -> tuple[float, float]:
    """Open interval of admissible s at omega = 1 (upper end included for gamma > 0)."""
    if params.gamma_sign > 0:
        return -1.0, 1.0
    return -1.0, -s_star_lower(params.gamma)


def momentum_sign_pattern(b: float, n: int = 200) -> MomentumSweep:
    params = ModelParams(b=b)
    lo, hi = admissible_s_interval(params)
    s_values = np.linspace(lo, hi, n + 2)[1:-1]
    momenta = np.array([momentum_closed(1.0, 2.0 * s, params) for s in s_values])
    return MomentumSweep(b=b, s=s_values, momentum=momenta)


@dataclass
class ConvergenceStudy:
    """H^m distances of DNLS-gauge profiles to the algebraic soliton."""

    b: float
    m: int
    s_values: List[float]
    distances: List[float]
    tail_estimate: float

    @property
    def strictly_decreasing(self) -> bool:
        return all(a > b for a, b in zip(self.distances, self.distances[1:]))


def converge_to_algebraic(
    s_list: Sequence[float],
    m: int,
    grid: SpectralGrid,
    params: ModelParams,
    taper_fraction: float = 0.1,
    tail_tolerance: float = 0.25,
) -> ConvergenceStudy:
    """Distances ||phi_{1,2s} - phi_{1,2}||_{H^m} of the DNLS-gauge profiles.

    The difference is multiplied by a smooth edge taper so that the carrier
    mismatch at the periodic boundary does not enter the norm.

    Raises:
        GridTooShortError: If the truncated algebraic tail exceeds tail_tolerance
    """
    if params.gamma_sign <= 0:
        raise ParameterError("Algebraic solitons need gamma > 0 (b > -3/16)")
    if m not in (0, 1, 2):
        raise ParameterError(f"m must be 0, 1 or 2, got {m}")

    limit = SolitonProfile(1.0, 2.0, params)
    # Mass of 8/(4x^2 + gamma) beyond the taper start, carrier-weighted per derivative
    cutoff = (1.0 - taper_fraction) * grid.half_length
    tail_estimate = math.sqrt(2.0**m * 4.0 / cutoff)
    if tail_estimate > tail_tolerance:
        raise GridTooShortError(
            f"Algebraic tail beyond |x|={cutoff:.4g} is {tail_estimate:.3e} in H^{m} "
            f"(tolerance {tail_tolerance:.3e}); enlarge the half length",
            tail_estimate=tail_estimate,
            tolerance=tail_tolerance,
        )

    taper = edge_taper(grid, taper_fraction)
    reference = limit.dnls(grid.x)
    distances = []
    for s in s_list:
        if not -1.0 < s <= 1.0:
            raise ParameterError(f"s must lie in (-1, 1], got {s}")
        profile = SolitonProfile(1.0, 2.0 * s, params)
        difference = Field(grid, taper * (profile.dnls(grid.x) - reference))
        distances.append(hm_norm(difference, m))
        logger.debug(f"s={s}: H^{m} distance {distances[-1]:.6e}")

    return ConvergenceStudy(
        b=params.b,
        m=m,
        s_values=list(s_list),
        distances=distances,
        tail_estimate=tail_estimate,
    )
