"""Parameter bookkeeping: b and gamma, existence regions, s* and the mass threshold."""

import math

from scipy.optimize import bisect

from .exceptions import (
    InadmissibleParametersError,
    NumericalError,
    ParameterError,
)
from .logging_config import get_logger
from .models import ModelParams, ParamRegion, RegionTag

logger = get_logger(__name__)

BOUNDARY_RTOL = 1e-12
S_STAR_BRACKET = (1e-6, 1.0 - 1e-6)
S_STAR_MAX_STEPS = 200


def gamma_of_b(b: float) -> float:
    """Return gamma = 1 + 16b/3."""
    return ModelParams(b=b).gamma


def s_star_lower(gamma: float) -> float:
    """Lower existence bound s_* = sqrt(-gamma / (1 - gamma)) for gamma <= 0."""
    if gamma > 0:
        raise ParameterError(f"s_* is only defined for gamma <= 0, got {gamma}")
    return math.sqrt(-gamma / (1.0 - gamma))


def classify(omega: float, c: float, params: ModelParams) -> ParamRegion:
    """Classify (omega, c) into the existence regions for the given gamma.

    Args:
        omega: Frequency, must be positive
        c: Velocity
        params: Model parameters

    Returns:
        ParamRegion with the region tag

    Raises:
        ParameterError: If omega is not positive
    """
    if not math.isfinite(omega) or omega <= 0:
        raise ParameterError(f"omega must be positive, got {omega}")
    if not math.isfinite(c):
        raise ParameterError(f"c must be finite, got {c}")

    gamma = params.gamma
    root = 2.0 * math.sqrt(omega)

    if params.gamma_sign > 0:
        if abs(c - root) <= BOUNDARY_RTOL * max(1.0, root):
            tag = RegionTag.ALGEBRAIC_BOUNDARY
        elif -root < c < root:
            tag = RegionTag.EXPONENTIAL_INTERIOR
        else:
            tag = RegionTag.INADMISSIBLE
        return ParamRegion(tag=tag, omega=omega, c=c, gamma=gamma)

    lower = s_star_lower(gamma)
    if -root < c < -lower * root:
        tag = RegionTag.EXPONENTIAL_INTERIOR
    else:
        tag = RegionTag.INADMISSIBLE
    return ParamRegion(
        tag=tag, omega=omega, c=c, gamma=gamma, s_star_lower=lower
    )


def require_admissible(
    omega: float, c: float, params: ModelParams
) -> ParamRegion:
    """Classify and raise if the parameters admit no soliton.

    Raises:
        InadmissibleParametersError: With the admissible interval in the message
    """
    region = classify(omega, c, params)
    if not region.admissible:
        raise InadmissibleParametersError(
            f"No soliton for omega={omega}, c={c}, b={params.b}: "
            f"need {region.describe_interval()}",
            region=region,
        )
    return region


def s_star(b: float) -> float:
    """Return the unique s* in (0, 1) where the momentum of phi_{1,2s} vanishes.

    Args:
        b: Quintic coefficient, must be positive

    Returns:
        s* with |P(phi_{1,2s*})| below 1e-12

    Raises:
        ParameterError: If b <= 0 (the momentum has no zero there)
    """
    from .soliton import momentum_closed

    if b <= 0:
        raise ParameterError(f"s* exists only for b > 0, got b={b}")

    params = ModelParams(b=b)

    def momentum_at(s: float) -> float:
        return momentum_closed(1.0, 2.0 * s, params)

    lo, hi = S_STAR_BRACKET
    if momentum_at(lo) <= 0 or momentum_at(hi) >= 0:
        raise NumericalError(f"No sign change of the momentum on [{lo}, {hi}]")

    root = bisect(
        momentum_at,
        lo,
        hi,
        xtol=1e-15,
        maxiter=S_STAR_MAX_STEPS,
    )
    residual = momentum_at(root)
    logger.debug(f"s*(b={b}) = {root!r}, residual momentum {residual:.3e}")
    if abs(residual) >= 1e-12:
        logger.warning(f"s* momentum residual {residual:.3e} above 1e-12")
    return float(root)


def mass_threshold(b: float) -> float:
    """Return the mass threshold M*(b).

    For b > 0 this is the mass of phi_{1,2s*}; for -3/16 < b <= 0 it is
    4 pi / gamma^{3/2}.

    Raises:
        ParameterError: If b <= -3/16
    """
    from .soliton import mass_closed

    params = ModelParams(b=b)
    if params.gamma_sign <= 0:
        raise ParameterError(f"mass threshold needs b > -3/16, got b={b}")
    if b > 0:
        return mass_closed(1.0, 2.0 * s_star(b), params)
    return 4.0 * math.pi / params.gamma**1.5
