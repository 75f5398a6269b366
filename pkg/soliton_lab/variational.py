"""Nehari-manifold and mass-constrained minimization, and Gagliardo-Nirenberg constants."""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import fft as sp_fft
from scipy.optimize import brentq

from .exceptions import NehariProjectionError, ParameterError
from .functionals import demodulate, ec, modulate, nehari_coefficients
from .logging_config import get_logger
from .models import ModelParams, RegionTag
from .params import require_admissible, s_star_lower
from .soliton import action_d, mass_closed
from .spectral import Field, SpectralGrid, default_grid, derivative, inner, lp_norm

logger = get_logger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITERS = 20000
STEP_GROWTH = 1.2
STEP_FLOOR = 1e-8
STEP_CEILING = 4.0
# Relative slack when comparing objective values in the descent test
DESCENT_SLACK = 1e-14


def _positive_root(quadratic: float, quartic: float, sextic: float) -> float:
    """Positive t with quadratic + quartic t - sextic t^2 = 0."""
    if quadratic <= 0:
        raise NehariProjectionError(
            f"Quadratic part {quadratic:.3e} is not positive; the field is outside "
            "the cone where the Nehari projection is defined"
        )
    if sextic <= 0:
        raise NehariProjectionError(
            "Sextic coefficient vanishes (zero field or gamma <= 0); no Nehari scaling exists"
        )
    root = math.sqrt(quartic * quartic + 4.0 * quadratic * sextic)
    if quartic < 0:
        return 2.0 * quadratic / (root - quartic)
    return (quartic + root) / (2.0 * sextic)


def _quadratic_form_name(omega: float, c: float, params: ModelParams) -> str:
    region = require_admissible(omega, c, params)
    return "demodulated" if region.is_algebraic else "direct"


def nehari_project(
    phi: Field, omega: float, c: float, params: ModelParams
) -> Tuple[Field, float]:
    """Scale phi onto the Nehari manifold.

    K(lambda phi) = lambda^2 A + lambda^4 B - lambda^6 C, so lambda^2 is the
    positive root of A + B t - C t^2.

    Returns:
        The projected field and the scale lambda

    Raises:
        ParameterError: If gamma <= 0
        NehariProjectionError: If A <= 0 or C = 0
    """
    if params.gamma_sign <= 0:
        raise ParameterError("The Nehari projection needs gamma > 0 (b > -3/16)")
    form = _quadratic_form_name(omega, c, params)
    quadratic, quartic, sextic = nehari_coefficients(phi, omega, c, params, form)  # type: ignore[arg-type]
    scale = math.sqrt(_positive_root(quadratic, quartic, sextic))
    return phi * scale, scale


class _Problem:
    """Objective and L^2 gradient in demodulated variables psi = e^{-icx/2} phi."""

    def __init__(self, grid: SpectralGrid, c: float, params: ModelParams, mass_coeff: float):
        self.grid = grid
        self.c = c
        self.gamma = params.gamma
        self.params = params
        self.mass_coeff = mass_coeff

    def objective(self, psi: Field) -> float:
        return ec(psi, self.c, self.params) + 0.5 * self.mass_coeff * lp_norm(psi, 2) ** 2

    def gradient(self, psi: Field) -> Field:
        density = psi.abs2
        values = (
            -derivative(psi, 2).values
            + self.mass_coeff * psi.values
            + 0.5 * self.c * density * psi.values
            - (3.0 / 16.0) * self.gamma * density**2 * psi.values
        )
        return Field(self.grid, values)

    def precondition(self, f: Field, shift: float) -> Field:
        return Field(self.grid, sp_fft.ifft(f.spectrum / (shift + self.grid.k**2)))


def _gaussian(grid: SpectralGrid, width: float = 1.0) -> Field:
    return Field(grid, np.exp(-0.5 * (grid.x / width) ** 2))


@dataclass
class NehariResult:
    """Outcome of the Nehari-manifold descent."""

    minimizer: Field
    value: float
    iterations: int
    residual: float
    converged: bool
    nehari: float
    history: List[float] = field(default_factory=list)

    def summary(self) -> Dict[str, object]:
        return {
            "value": self.value,
            "iterations": self.iterations,
            "residual": self.residual,
            "converged": self.converged,
            "nehari": self.nehari,
        }


def nehari_minimize(
    omega: float,
    c: float,
    params: ModelParams,
    init: Optional[Field] = None,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
    grid: Optional[SpectralGrid] = None,
) -> NehariResult:
    """Minimize the action on the Nehari manifold.

    Each iteration takes a preconditioned gradient step in psi and projects
    back onto {K = 0}; steps that raise the action are halved. The returned
    minimizer is the gauge-form field e^{icx/2} psi.

    Args:
        omega: Frequency
        c: Velocity (c = 2 sqrt(omega) selects the algebraic soliton)
        params: Model parameters, gamma > 0
        init: Initial gauge-form field; defaults to a centered Gaussian
        max_iters: Iteration cap
        tol: Threshold on sqrt((P^{-1} g, g))
        grid: Grid used when init is not given

    Raises:
        ParameterError: If gamma <= 0
        InadmissibleParametersError: If (omega, c) admits no soliton
    """
    if params.gamma_sign <= 0:
        raise ParameterError("Nehari minimization needs gamma > 0 (b > -3/16)")
    region = require_admissible(omega, c, params)
    if init is None:
        grid = grid or default_grid(region.is_algebraic)
        init = modulate(_gaussian(grid), c)
    grid = init.grid

    mass_coeff = omega - 0.25 * c * c
    if region.tag == RegionTag.ALGEBRAIC_BOUNDARY:
        mass_coeff = 0.0
        shift = (math.pi / grid.half_length) ** 2
    else:
        shift = 1.0
    problem = _Problem(grid, c, params, mass_coeff)

    def project(psi: Field) -> Field:
        quadratic = lp_norm(derivative(psi), 2) ** 2 + mass_coeff * lp_norm(psi, 2) ** 2
        quartic = 0.5 * c * lp_norm(psi, 4) ** 4
        sextic = (3.0 / 16.0) * params.gamma * lp_norm(psi, 6) ** 6
        return psi * math.sqrt(_positive_root(quadratic, quartic, sextic))

    psi = project(demodulate(init, c))
    value = problem.objective(psi)
    history = [value]
    step_size = 1.0
    residual = math.inf
    converged = False
    iteration = 0

    for iteration in range(1, max_iters + 1):
        gradient = problem.gradient(psi)
        direction = problem.precondition(gradient, shift)
        residual = math.sqrt(max(inner(direction, gradient), 0.0))
        if residual < tol:
            converged = True
            break

        while step_size >= STEP_FLOOR:
            try:
                trial = project(psi - direction * step_size)
            except NehariProjectionError:
                step_size *= 0.5
                continue
            trial_value = problem.objective(trial)
            if trial_value <= value + DESCENT_SLACK * abs(value):
                psi, value = trial, trial_value
                history.append(value)
                step_size = min(step_size * STEP_GROWTH, STEP_CEILING)
                break
            step_size *= 0.5
        else:
            logger.warning(
                f"Nehari descent stalled at iteration {iteration} (residual {residual:.3e})"
            )
            break

        if iteration % 500 == 0:
            logger.debug(f"Nehari iteration {iteration}: S={value:.15g}, residual={residual:.3e}")

    if not converged:
        logger.warning(
            f"Nehari minimization did not reach tol={tol:.1e} "
            f"after {iteration} iterations (residual {residual:.3e})"
        )

    quadratic = lp_norm(derivative(psi), 2) ** 2 + mass_coeff * lp_norm(psi, 2) ** 2
    nehari = (
        quadratic
        + 0.5 * c * lp_norm(psi, 4) ** 4
        - (3.0 / 16.0) * params.gamma * lp_norm(psi, 6) ** 6
    )
    logger.info(
        f"Nehari minimum at (omega={omega}, c={c}): {value:.12g} "
        f"(d = {action_d(omega, c, params):.12g}) in {iteration} iterations"
    )
    return NehariResult(
        minimizer=modulate(psi, c),
        value=value,
        iterations=iteration,
        residual=residual,
        converged=converged,
        nehari=nehari,
        history=history,
    )


@dataclass
class MassConstrainedResult:
    """Outcome of the mass-constrained descent of E_c."""

    minimizer: Field
    value: float
    multiplier: float
    omega_tilde: float
    iterations: int
    residual: float
    converged: bool
    history: List[float] = field(default_factory=list)

    def summary(self) -> Dict[str, object]:
        return {
            "value": self.value,
            "multiplier": self.multiplier,
            "omega_tilde": self.omega_tilde,
            "iterations": self.iterations,
            "residual": self.residual,
            "converged": self.converged,
        }


def _check_mass_constrained(c: float, m: float, params: ModelParams) -> None:
    if c >= 0:
        raise ParameterError(f"The mass-constrained problem needs c < 0, got c={c}")
    if m <= 0:
        raise ParameterError(f"Mass must be positive, got m={m}")
    if params.gamma_sign > 0:
        ceiling = 2.0 * math.pi / math.sqrt(params.gamma)
        if m >= ceiling:
            raise ParameterError(
                f"For gamma > 0 the mass must lie below 2 pi / sqrt(gamma) = {ceiling:.6g}, got m={m}"
            )


def mass_constrained_minimize(
    c: float,
    m: float,
    params: ModelParams,
    init: Optional[Field] = None,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
    grid: Optional[SpectralGrid] = None,
) -> MassConstrainedResult:
    """Minimize E_c over ||psi||^2 = m by a normalized preconditioned gradient flow.

    The multiplier is lambda = -(E_c'(psi), psi) / m, so the minimizer solves
    -psi'' + lambda psi + (c/2)|psi|^2 psi - (3/16) gamma |psi|^4 psi = 0 and
    the soliton frequency is omega~ = lambda + c^2/4.

    Raises:
        ParameterError: If c >= 0, m <= 0, or gamma > 0 with m >= 2 pi / sqrt(gamma)
    """
    _check_mass_constrained(c, m, params)
    if init is None:
        init = _gaussian(grid or default_grid(), width=2.0)
    grid = init.grid
    problem = _Problem(grid, c, params, mass_coeff=0.0)

    def renormalize(psi: Field) -> Field:
        norm_sq = lp_norm(psi, 2) ** 2
        if norm_sq == 0:
            raise ParameterError("Cannot normalize the zero field")
        return psi * math.sqrt(m / norm_sq)

    psi = renormalize(init)
    value = problem.objective(psi)
    history = [value]
    step_size = 1.0
    residual = math.inf
    multiplier = math.nan
    converged = False
    iteration = 0

    for iteration in range(1, max_iters + 1):
        gradient = problem.gradient(psi)
        multiplier = -inner(gradient, psi) / m
        residual = lp_norm(gradient + psi * multiplier, 2)
        if residual < tol:
            converged = True
            break

        pre_gradient = problem.precondition(gradient, 1.0)
        pre_psi = problem.precondition(psi, 1.0)
        beta = inner(pre_gradient, psi) / inner(pre_psi, psi)
        direction = pre_gradient - pre_psi * beta

        while step_size >= STEP_FLOOR:
            trial = renormalize(psi - direction * step_size)
            trial_value = problem.objective(trial)
            if trial_value <= value + DESCENT_SLACK * abs(value):
                psi, value = trial, trial_value
                history.append(value)
                step_size = min(step_size * STEP_GROWTH, STEP_CEILING)
                break
            step_size *= 0.5
        else:
            logger.warning(
                f"Mass-constrained descent stalled at iteration {iteration} (residual {residual:.3e})"
            )
            break

        if iteration % 500 == 0:
            logger.debug(f"Mass iteration {iteration}: E_c={value:.15g}, residual={residual:.3e}")

    if not converged:
        logger.warning(
            f"Mass-constrained minimization did not reach tol={tol:.1e} "
            f"after {iteration} iterations (residual {residual:.3e})"
        )
    logger.info(f"Mass-constrained minimum: {value:.12g}, lambda={multiplier:.12g}")
    return MassConstrainedResult(
        minimizer=psi,
        value=value,
        multiplier=multiplier,
        omega_tilde=multiplier + 0.25 * c * c,
        iterations=iteration,
        residual=residual,
        converged=converged,
        history=history,
    )


def mass_constrained_value_closed(c: float, m: float, params: ModelParams) -> Tuple[float, float]:
    """Closed-form -nu(c, m) and the frequency omega with M(phi_{omega,c}) = m.

    The mass increases strictly in omega for c < 0, from 0 at omega = c^2/4.
    """
    _check_mass_constrained(c, m, params)
    low = 0.25 * c * c * (1.0 + 1e-12)

    def excess(omega: float) -> float:
        return mass_closed(omega, c, params) - m

    if params.gamma_sign < 0:
        high = 0.25 * c * c / s_star_lower(params.gamma) ** 2 * (1.0 - 1e-12)
    else:
        high = 2.0 * low
        while excess(high) < 0:
            high *= 2.0
            if high > 1e12:
                raise ParameterError(f"No frequency carries mass {m} at c={c}")

    omega = brentq(excess, low, high, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    value = action_d(omega, c, params) - 0.5 * (omega - 0.25 * c * c) * m
    logger.debug(f"Closed-form constrained value at c={c}, m={m}: {value:.15g} (omega={omega:.15g})")
    return value, omega


def gn_ratio(f: Field) -> float:
    """||f||_4 / (||f'||^{1/4} ||f||^{3/4}), invariant under dilation and scaling."""
    return lp_norm(f, 4) / (lp_norm(derivative(f), 2) ** 0.25 * lp_norm(f, 2) ** 0.75)


@dataclass
class GNConstants:
    c1: float
    c2: float
    best_family: str
    ratios: Dict[str, List[float]]


def gn_constants(grid: SpectralGrid) -> GNConstants:
    """Empirical C1 over dilated Gaussians and sech profiles; C2 = C1^8 / 64."""
    widths = np.geomspace(max(8.0 * grid.dx, 0.5), grid.half_length / 12.0, 7)
    families = {
        "gaussian": lambda x, w: np.exp(-0.5 * (x / w) ** 2),
        "sech": lambda x, w: 1.0 / np.cosh(x / w),
    }
    ratios = {
        name: [gn_ratio(Field(grid, shape(grid.x, w))) for w in widths]
        for name, shape in families.items()
    }
    best_family = max(ratios, key=lambda name: max(ratios[name]))
    c1 = max(ratios[best_family])
    logger.debug(f"GN sweep: C1={c1:.10f} from {best_family}")
    return GNConstants(c1=c1, c2=c1**8 / 64.0, best_family=best_family, ratios=ratios)


def sharp_gn_ratio(f: Field, params: ModelParams) -> float:
    """(gamma/32)||f||_6^6 / ((1/2)||f'||^2 ((sqrt(gamma)/2pi)||f||^2)^2).

    Bounded by 1 for every f; the bound is attained by (sech 2x)^{1/2}.
    """
    if params.gamma_sign <= 0:
        raise ParameterError("The sharp GN ratio is stated for gamma > 0")
    gamma = params.gamma
    mass_factor = math.sqrt(gamma) / (2.0 * math.pi) * lp_norm(f, 2) ** 2
    kinetic = 0.5 * lp_norm(derivative(f), 2) ** 2
    return (gamma / 32.0) * lp_norm(f, 6) ** 6 / (kinetic * mass_factor**2)
