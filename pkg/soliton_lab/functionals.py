"""Discrete conserved quantities, variational functionals, gauge maps and potential wells.

Fields named ``u`` solve the DNLS equation; fields named ``v`` solve its
gauge form. All functionals use spectral derivatives and periodic
trapezoid quadrature and assume the field has decayed at the window edges.
"""

import math
from typing import Literal, Tuple

import numpy as np

from .exceptions import ParameterError
from .logging_config import get_logger
from .models import InvariantRecord, ModelParams, WellMembership
from .soliton import SolitonProfile, action_d
from .spectral import (
    EXPONENTIAL_EDGE_TOLERANCE,
    Field,
    SpectralGrid,
    antiderivative_from_left,
    check_edge_decay,
    derivative,
    inner,
    lp_norm,
)

logger = get_logger(__name__)

QuadraticForm = Literal["direct", "demodulated"]
ResidualKind = Literal["dnls", "amplitude", "gauge"]
RESIDUAL_KINDS: Tuple[ResidualKind, ...] = ("dnls", "amplitude", "gauge")


def _integral(grid: SpectralGrid, values: np.ndarray) -> float:
    return grid.dx * float(np.sum(values))


def invariants_u(
    u: Field,
    params: ModelParams,
    edge_tolerance: float = EXPONENTIAL_EDGE_TOLERANCE,
) -> InvariantRecord:
    """Energy, mass and momentum of a DNLS field."""
    check_edge_decay(u, edge_tolerance)
    ux = derivative(u)
    density = u.abs2
    mass = lp_norm(u, 2) ** 2
    momentum = inner(1j * ux, u)
    cubic = _integral(u.grid, (1j * density * ux.values * np.conj(u.values)).real)
    energy = (
        0.5 * lp_norm(ux, 2) ** 2
        - 0.25 * cubic
        - (params.b / 6.0) * _integral(u.grid, density**3)
    )
    return InvariantRecord(energy=energy, mass=mass, momentum=momentum)


def invariants_v(
    v: Field,
    params: ModelParams,
    edge_tolerance: float = EXPONENTIAL_EDGE_TOLERANCE,
) -> InvariantRecord:
    """Energy, mass and momentum of a gauge-form field."""
    check_edge_decay(v, edge_tolerance)
    vx = derivative(v)
    energy = 0.5 * lp_norm(vx, 2) ** 2 - (params.gamma / 32.0) * lp_norm(v, 6) ** 6
    mass = lp_norm(v, 2) ** 2
    momentum = inner(1j * vx, v) + 0.25 * lp_norm(v, 4) ** 4
    return InvariantRecord(energy=energy, mass=mass, momentum=momentum)


def _gauge_phase(f: Field) -> np.ndarray:
    density = Field(f.grid, f.abs2)
    return 0.25 * antiderivative_from_left(density).values.real


def gauge_G(u: Field, edge_tolerance: float = EXPONENTIAL_EDGE_TOLERANCE) -> Field:
    """v = u exp((i/4) int_{-L}^x |u|^2)."""
    check_edge_decay(u, edge_tolerance)
    return Field(u.grid, u.values * np.exp(1j * _gauge_phase(u)))


def gauge_G_inverse(
    v: Field, edge_tolerance: float = EXPONENTIAL_EDGE_TOLERANCE
) -> Field:
    check_edge_decay(v, edge_tolerance)
    return Field(v.grid, v.values * np.exp(-1j * _gauge_phase(v)))


def action_S(
    u: Field,
    omega: float,
    c: float,
    params: ModelParams,
    edge_tolerance: float = EXPONENTIAL_EDGE_TOLERANCE,
) -> float:
    record = invariants_u(u, params, edge_tolerance)
    return record.energy + 0.5 * omega * record.mass + 0.5 * c * record.momentum


def action_Scal(
    v: Field,
    omega: float,
    c: float,
    params: ModelParams,
    edge_tolerance: float = EXPONENTIAL_EDGE_TOLERANCE,
) -> float:
    record = invariants_v(v, params, edge_tolerance)
    return record.energy + 0.5 * omega * record.mass + 0.5 * c * record.momentum


def modulate(psi: Field, c: float) -> Field:
    """e^{icx/2} psi."""
    return Field(psi.grid, np.exp(0.5j * c * psi.grid.x) * psi.values)


def demodulate(v: Field, c: float) -> Field:
    """e^{-icx/2} v."""
    return Field(v.grid, np.exp(-0.5j * c * v.grid.x) * v.values)


def quadratic_form(
    v: Field, omega: float, c: float, form: QuadraticForm = "direct"
) -> float:
    """Quadratic part of the Nehari functional.

    ``direct`` evaluates ||v'||^2 + omega ||v||^2 + c (iv', v); ``demodulated``
    evaluates ||(e^{-icx/2} v)'||^2 + (omega - c^2/4) ||v||^2, which is the
    form that stays meaningful on the algebraic boundary.
    """
    mass = lp_norm(v, 2) ** 2
    if form == "direct":
        vx = derivative(v)
        return lp_norm(vx, 2) ** 2 + omega * mass + c * inner(1j * vx, v)
    if form == "demodulated":
        psi_x = derivative(demodulate(v, c))
        return lp_norm(psi_x, 2) ** 2 + (omega - 0.25 * c * c) * mass
    raise ParameterError(f"Unknown quadratic form: {form}")


def nehari_coefficients(
    v: Field,
    omega: float,
    c: float,
    params: ModelParams,
    form: QuadraticForm = "direct",
) -> Tuple[float, float, float]:
    """(A, B, C) with K(lambda v) = lambda^2 A + lambda^4 B - lambda^6 C."""
    quadratic = quadratic_form(v, omega, c, form)
    quartic = 0.5 * c * lp_norm(v, 4) ** 4
    sextic = (3.0 / 16.0) * params.gamma * lp_norm(v, 6) ** 6
    return quadratic, quartic, sextic


def nehari_K(
    v: Field,
    omega: float,
    c: float,
    params: ModelParams,
    form: QuadraticForm = "direct",
    edge_tolerance: float = EXPONENTIAL_EDGE_TOLERANCE,
) -> float:
    check_edge_decay(v, edge_tolerance)
    quadratic, quartic, sextic = nehari_coefficients(v, omega, c, params, form)
    return quadratic + quartic - sextic


def jc(v: Field, c: float, params: ModelParams) -> float:
    """J_c(v) = -(c/8)||v||_4^4 + (gamma/16)||v||_6^6."""
    return -0.125 * c * lp_norm(v, 4) ** 4 + (params.gamma / 16.0) * lp_norm(v, 6) ** 6


def ec(psi: Field, c: float, params: ModelParams) -> float:
    """E_c(psi) = ||psi'||^2/2 + (c/8)||psi||_4^4 - (gamma/32)||psi||_6^6."""
    psi_x = derivative(psi)
    return (
        0.5 * lp_norm(psi_x, 2) ** 2
        + 0.125 * c * lp_norm(psi, 4) ** 4
        - (params.gamma / 32.0) * lp_norm(psi, 6) ** 6
    )


def x_norm(phi: Field, omega: float, c: float) -> float:
    """Norm of e^{-icx/2} phi in homogeneous H^1 intersected with L^4."""
    psi = demodulate(phi, c)
    return lp_norm(derivative(psi), 2) + lp_norm(psi, 4)


def elliptic_residual(
    field: Field,
    omega: float,
    c: float,
    params: ModelParams,
    which: ResidualKind,
    edge_tolerance: float = EXPONENTIAL_EDGE_TOLERANCE,
) -> float:
    """Sup norm of the profile equation's left-hand side.

    ``dnls`` checks the DNLS soliton equation, ``amplitude`` the real ODE for
    Phi and ``gauge`` the gauge-form soliton equation.
    """
    check_edge_decay(field, edge_tolerance)
    f = field.values
    fx = derivative(field).values
    fxx = derivative(field, 2).values
    density = field.abs2
    gamma = params.gamma

    if which == "dnls":
        residual = (
            -fxx + omega * f + 1j * c * fx - 1j * density * fx - params.b * density**2 * f
        )
    elif which == "amplitude":
        residual = (
            -fxx
            + (omega - 0.25 * c * c) * f
            + 0.5 * c * density * f
            - (3.0 / 16.0) * gamma * density**2 * f
        )
    elif which == "gauge":
        residual = (
            -fxx
            + omega * f
            + 1j * c * fx
            + 0.5 * c * density * f
            - (3.0 / 16.0) * gamma * density**2 * f
        )
    else:
        raise ParameterError(f"Unknown residual kind: {which}")
    return float(np.max(np.abs(residual)))


def profile_residual(
    profile: SolitonProfile, which: ResidualKind, grid: SpectralGrid
) -> float:
    """Residual of the sampled closed-form profile matching ``which``."""
    if which not in RESIDUAL_KINDS:
        raise ParameterError(f"Unknown residual kind: {which}; use one of {RESIDUAL_KINDS}")
    sample = profile.sample(grid, which)
    return elliptic_residual(
        sample,
        profile.omega,
        profile.c,
        profile.params,
        which,
        edge_tolerance=profile.edge_tolerance,
    )


def profile_invariants(profile: SolitonProfile, grid: SpectralGrid) -> InvariantRecord:
    """Quadrature invariants of the sampled gauge-form profile e^{icx/2} Phi.

    Computed from the real amplitude Phi so the carrier is never
    differentiated: M = |Phi|_2^2, P = -(c/2) M + |Phi|_4^4 / 4 and
    E = |Phi'|_2^2 / 2 + (c^2/8) M - (gamma/32) |Phi|_6^6. On the algebraic
    boundary the mass beyond |x| = L is added analytically.
    """
    amplitude = profile.sample(grid, "amplitude")
    check_edge_decay(amplitude, profile.edge_tolerance)
    c, gamma = profile.c, profile.gamma

    mass = lp_norm(amplitude, 2) ** 2
    if profile.is_algebraic:
        root = math.sqrt(gamma)
        tail_mass = (8.0 / root) * (0.5 * math.pi - math.atan(c * grid.half_length / root))
        logger.debug(f"Algebraic tail mass beyond L={grid.half_length}: {tail_mass:.6e}")
        mass += tail_mass

    kinetic = lp_norm(derivative(amplitude), 2) ** 2
    return InvariantRecord(
        energy=0.5 * kinetic + 0.125 * c * c * mass - (gamma / 32.0) * lp_norm(amplitude, 6) ** 6,
        mass=mass,
        momentum=-0.5 * c * mass + 0.25 * lp_norm(amplitude, 4) ** 4,
    )


def functional_record(
    v: Field,
    omega: float,
    c: float,
    params: ModelParams,
    edge_tolerance: float = EXPONENTIAL_EDGE_TOLERANCE,
) -> InvariantRecord:
    """Invariants of a gauge-form field plus action, Nehari value and J_c."""
    record = invariants_v(v, params, edge_tolerance)
    action = record.energy + 0.5 * omega * record.mass + 0.5 * c * record.momentum
    return record.model_copy(
        update={
            "action": action,
            "nehari": nehari_K(v, omega, c, params, edge_tolerance=edge_tolerance),
            "jc": jc(v, c, params),
        }
    )


def well_membership(
    v: Field,
    omega: float,
    c: float,
    params: ModelParams,
    tolerance: float = 1e-9,
    edge_tolerance: float = EXPONENTIAL_EDGE_TOLERANCE,
) -> WellMembership:
    """Margins of v against the potential wells defined by d(omega, c)."""
    d = action_d(omega, c, params)
    record = functional_record(v, omega, c, params, edge_tolerance)
    scale = max(1.0, abs(d))
    return WellMembership(
        s_margin=record.action - d,
        nehari=record.nehari,
        j_margin=record.jc - d,
        tolerance=tolerance * scale,
    )
