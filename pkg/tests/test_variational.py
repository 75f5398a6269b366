import math

import numpy as np
import pytest

from soliton_lab.exceptions import NehariProjectionError, ParameterError
from soliton_lab.functionals import nehari_K
from soliton_lab.models import ModelParams
from soliton_lab.soliton import SolitonProfile, action_d, mass_closed
from soliton_lab.spectral import Field, SpectralGrid, default_grid
from soliton_lab.stability import orbit_distance
from soliton_lab.variational import (
    gn_constants,
    gn_ratio,
    mass_constrained_minimize,
    mass_constrained_value_closed,
    nehari_minimize,
    nehari_project,
    sharp_gn_ratio,
)

UNIT = ModelParams(b=0.0)
HALF = ModelParams.from_gamma(0.5)
# gamma = -0.2
FOCUSING = ModelParams(b=-0.225)


@pytest.fixture
def grid():
    return SpectralGrid(20.0, 512)


def _non_increasing(history):
    return all(b <= a + 1e-12 * abs(a) for a, b in zip(history, history[1:]))


def test_nehari_project_scales_back_to_soliton(grid):
    """Test that 2 phi is projected back with scale 1/2."""
    phi = SolitonProfile(1.0, 0.5, HALF).sample(grid, "gauge")
    projected, scale = nehari_project(2.0 * phi, 1.0, 0.5, HALF)
    assert scale == pytest.approx(0.5, rel=1e-10)
    assert np.allclose(projected.values, phi.values, atol=1e-10)


def test_nehari_project_lands_on_manifold(grid):
    """Test K = 0 after projecting an arbitrary bump."""
    bump = Field(grid, (1.0 + 0.5j * grid.x) * np.exp(-grid.x ** 2))
    projected, _ = nehari_project(bump, 1.0, -0.8, HALF)
    assert nehari_K(projected, 1.0, -0.8, HALF) == pytest.approx(0.0, abs=1e-10)


def test_nehari_project_errors(grid):
    """Test the zero field and gamma <= 0."""
    with pytest.raises(NehariProjectionError):
        nehari_project(Field.zeros(grid), 1.0, 0.5, HALF)
    bump = Field(grid, np.exp(-grid.x ** 2))
    with pytest.raises(ParameterError):
        nehari_project(bump, 1.0, -1.5, FOCUSING)


def test_nehari_minimize_rest_soliton(grid):
    """Test that the Nehari minimum at (1, 0), gamma = 1, is d = pi."""
    result = nehari_minimize(1.0, 0.0, UNIT, max_iters=5000, tol=1e-6, grid=grid)
    assert result.value == pytest.approx(math.pi, rel=1e-6)
    assert abs(result.nehari) < 1e-8
    assert _non_increasing(result.history)
    reference = SolitonProfile(1.0, 0.0, UNIT).sample(grid, "gauge")
    assert orbit_distance(result.minimizer, reference).distance < 1e-3
    assert set(result.summary()) == {"value", "iterations", "residual", "converged", "nehari"}


def test_nehari_minimize_rejects_nonpositive_gamma():
    """Test that gamma <= 0 is rejected."""
    with pytest.raises(ParameterError):
        nehari_minimize(1.0, -1.5, FOCUSING)


@pytest.mark.slow
def test_nehari_minimize_moving_soliton():
    """Test the Nehari minimum against d at a moving interior point."""
    grid = SpectralGrid(30.0, 1024)
    result = nehari_minimize(1.0, 1.0, HALF, max_iters=20000, tol=1e-6, grid=grid)
    assert result.value == pytest.approx(action_d(1.0, 1.0, HALF), rel=1e-5)


@pytest.mark.slow
def test_nehari_minimize_algebraic():
    """Test the Nehari minimum on the algebraic boundary."""
    result = nehari_minimize(1.0, 2.0, UNIT, max_iters=20000, tol=1e-5)
    assert result.value == pytest.approx(action_d(1.0, 2.0, UNIT), rel=1e-2)


def test_mass_constrained_closed_form():
    """Test that the closed form recovers omega = 1 from M(phi_{1,-1})."""
    mass = mass_closed(1.0, -1.0, FOCUSING)
    value, omega = mass_constrained_value_closed(-1.0, mass, FOCUSING)
    assert omega == pytest.approx(1.0, rel=1e-10)
    assert value == pytest.approx(action_d(1.0, -1.0, FOCUSING) - 0.375 * mass, rel=1e-10)


def test_mass_constrained_closed_form_positive_gamma():
    """Test the bracket search for gamma > 0."""
    mass = mass_closed(2.0, -1.0, HALF)
    _, omega = mass_constrained_value_closed(-1.0, mass, HALF)
    assert omega == pytest.approx(2.0, rel=1e-9)


def test_mass_constrained_minimize():
    """Test the constrained minimizer: lambda = 3/4 and the closed-form value."""
    grid = SpectralGrid(30.0, 512)
    mass = mass_closed(1.0, -1.0, FOCUSING)
    result = mass_constrained_minimize(-1.0, mass, FOCUSING, max_iters=5000, tol=1e-6, grid=grid)
    closed_value, _ = mass_constrained_value_closed(-1.0, mass, FOCUSING)
    assert result.multiplier == pytest.approx(0.75, rel=1e-3)
    assert result.omega_tilde == pytest.approx(1.0, rel=1e-3)
    assert result.value == pytest.approx(closed_value, rel=1e-4)
    assert _non_increasing(result.history)


@pytest.mark.parametrize(
    "c,m,params",
    [(0.5, 1.0, FOCUSING), (-1.0, 0.0, FOCUSING), (-1.0, 2.0 * math.pi / math.sqrt(0.5), HALF)],
)
def test_mass_constrained_rejects(c, m, params):
    """Test c >= 0, m <= 0 and the 2 pi / sqrt(gamma) ceiling."""
    with pytest.raises(ParameterError):
        mass_constrained_minimize(c, m, params, grid=SpectralGrid(10.0, 64))


def test_gn_ratio_is_scale_invariant():
    """Test that dilation and amplitude do not change the GN ratio."""
    grid = default_grid()
    narrow = Field(grid, 1.0 / np.cosh(grid.x))
    wide = Field(grid, 3.0 / np.cosh(grid.x / 2.0))
    assert gn_ratio(wide) == pytest.approx(gn_ratio(narrow), rel=1e-8)
    assert gn_ratio(narrow) == pytest.approx(3.0 ** -0.125, rel=1e-8)


def test_gn_constants():
    """Test C1 = 3^{-1/8} from the sech family and C2 = C1^8 / 64."""
    constants = gn_constants(default_grid())
    assert constants.best_family == "sech"
    assert constants.c1 == pytest.approx(3.0 ** -0.125, rel=1e-4)
    assert constants.c2 == pytest.approx(constants.c1 ** 8 / 64.0)
    assert max(constants.ratios["gaussian"]) == pytest.approx(math.pi ** -0.125, rel=1e-4)


def test_sharp_gn_ratio_extremal():
    """Test that (sech 2x)^{1/2} attains the sharp constant for any gamma > 0."""
    grid = default_grid()
    f = Field(grid, np.sqrt(1.0 / np.cosh(2.0 * grid.x)))
    assert sharp_gn_ratio(f, HALF) == pytest.approx(1.0, rel=1e-8)
    assert sharp_gn_ratio(f, ModelParams(b=0.4)) == pytest.approx(1.0, rel=1e-8)


def test_sharp_gn_ratio_below_one():
    """Test that a Gaussian stays below the sharp bound."""
    grid = default_grid()
    assert sharp_gn_ratio(Field(grid, np.exp(-grid.x ** 2)), UNIT) < 1.0
    with pytest.raises(ParameterError):
        sharp_gn_ratio(Field(grid, np.exp(-grid.x ** 2)), FOCUSING)
