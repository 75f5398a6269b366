import math

import numpy as np
import pytest

from soliton_lab.evolve import (
    Integrator,
    default_dt,
    record_invariants,
    run,
    step,
    step_count,
)
from soliton_lab.exceptions import BlowUpError, ConfigurationError, EdgeDecayError
from soliton_lab.models import Equation, EvolveConfig, ModelParams, WaveParams
from soliton_lab.soliton import SolitonProfile
from soliton_lab.spectral import Field, SpectralGrid, default_grid, hm_norm

UNIT = ModelParams(b=0.0)


@pytest.fixture
def grid():
    return SpectralGrid(20.0, 512)


def test_default_dt():
    """Test dt = min(0.2 dx^2, 1e-3) on the standard and a coarse grid."""
    assert default_dt(default_grid()) == pytest.approx(3.0517578125e-4)
    assert default_dt(SpectralGrid(40.0, 64)) == 1e-3


def test_step_count():
    """Test that the count of equal steps reaches t_final."""
    assert step_count(1.0, 0.3) == 4
    assert step_count(1.0, 0.25) == 4
    assert step_count(1e-5, 1.0) == 1


def test_rejects_oversized_dt():
    """Test that dt above 0.2 dx^2 is a configuration error."""
    config = EvolveConfig(dt=1e-2, t_final=1.0)
    with pytest.raises(ConfigurationError) as exc_info:
        Integrator(default_grid(), config)
    assert "dt <=" in str(exc_info.value)


def test_step_requires_decay(grid):
    """Test that step refuses a field that fills the window."""
    config = EvolveConfig(dt=1e-3, t_final=1e-3)
    with pytest.raises(EdgeDecayError):
        step(Field(grid, np.ones(grid.n_points)), config)


def test_linear_evolution_is_exact(grid):
    """Test the free Schroedinger flow of a Gaussian against its closed form."""
    x = grid.x
    u0 = Field(grid, np.exp(-x * x))
    config = EvolveConfig(dt=1e-3, t_final=0.5, nonlinearity_scale=0.0)
    trajectory = run(u0, config)
    t = trajectory.final.time
    exact = np.exp(-x * x / (1.0 + 4j * t)) / np.sqrt(1.0 + 4j * t)
    assert t == pytest.approx(0.5)
    assert np.max(np.abs(trajectory.final.field.values - exact)) < 1e-10


@pytest.mark.parametrize("equation,kind", [(Equation.DNLS, "dnls"), (Equation.GAUGE, "gauge")])
def test_soliton_rotates_in_place(grid, equation, kind):
    """Test that the soliton at c = 0 evolves as e^{it} times itself."""
    u0 = SolitonProfile(1.0, 0.0, UNIT).sample(grid, kind)
    config = EvolveConfig(equation=equation, dt=1e-3, t_final=0.5, snapshot_stride=100)
    trajectory = run(u0, config)
    assert not trajectory.blew_up
    assert len(trajectory.snapshots) == 6
    assert trajectory.times[-1] == pytest.approx(0.5)
    exact = Field(grid, np.exp(0.5j) * u0.values)
    assert hm_norm(trajectory.final.field - exact, 1) < 1e-5
    assert max(trajectory.drift.values()) < 1e-8


def test_step_matches_integrator(grid):
    """Test that a single step equals one integrator step."""
    u0 = SolitonProfile(1.0, 0.0, UNIT).sample(grid, "dnls")
    config = EvolveConfig(dt=1e-3, t_final=1e-3)
    single = step(u0, config)
    assert np.allclose(single.values, Integrator(grid, config).advance(u0).values)


def test_integrator_is_fourth_order_for_moving_soliton():
    """Test that halving dt cuts the time error of a moving soliton by about 16."""
    grid = SpectralGrid(60.0, 384)
    u0 = SolitonProfile(0.25, 0.5, UNIT).sample(grid, "dnls")
    finals = []
    for n_steps in (100, 200, 400):
        config = EvolveConfig(dt=1.0 / n_steps, t_final=1.0)
        finals.append(Integrator(grid, config).advance(u0, n_steps).values)
    coarse = np.max(np.abs(finals[0] - finals[1]))
    fine = np.max(np.abs(finals[1] - finals[2]))
    assert fine > 1e-13
    assert 12.0 < coarse / fine < 20.0


def test_advance_reports_failing_step_time(grid):
    """Test that BlowUpError carries t0 + k dt and the last finite state."""
    u0 = SolitonProfile(1.0, 0.0, UNIT).sample(grid, "dnls")
    config = EvolveConfig(dt=1e-3, t_final=1.0, blowup_threshold=1.0)
    with pytest.raises(BlowUpError) as exc_info:
        Integrator(grid, config).advance(u0, 5, t0=0.25)
    assert exc_info.value.time == pytest.approx(0.251)
    assert np.allclose(exc_info.value.last_state.values, u0.values)
    assert exc_info.value.exit_code == 3


def test_blowup_is_flagged(grid):
    """Test that exceeding the sup threshold stops the run at the failing step."""
    u0 = SolitonProfile(1.0, 0.0, UNIT).sample(grid, "dnls")
    config = EvolveConfig(dt=1e-3, t_final=0.1, snapshot_stride=10, blowup_threshold=1.0)
    trajectory = run(u0, config)
    assert trajectory.blew_up
    assert trajectory.blowup_time == pytest.approx(1e-3)
    assert trajectory.times == [0.0]


def test_trajectory_csv_and_write(grid, tmp_path):
    """Test the trajectory CSV layout and field dumps."""
    u0 = SolitonProfile(1.0, 0.0, UNIT).sample(grid, "dnls")
    config = EvolveConfig(dt=1e-3, t_final=0.02, snapshot_stride=10)
    trajectory = run(u0, config)
    lines = trajectory.to_csv().strip().split("\n")
    assert lines[0] == "t,energy,mass,momentum,nehari_sign,jc"
    assert len(lines) == 1 + 3

    path = trajectory.write(tmp_path / "run", dump_fields=True)
    assert path.name == "trajectory.csv"
    dumps = sorted((tmp_path / "run" / "fields").iterdir())
    assert [p.name for p in dumps] == ["snap_00000.bin", "snap_00001.bin", "snap_00002.bin"]


def test_record_invariants_with_reference():
    """Test that a reference wave adds action, Nehari value and J_c."""
    grid = default_grid()
    u0 = SolitonProfile(1.0, 0.0, UNIT).sample(grid, "dnls")
    plain = record_invariants(u0, EvolveConfig(dt=1e-4, t_final=1.0))
    assert plain.action is None
    assert plain.mass == pytest.approx(2.0 * math.pi, rel=1e-12)

    config = EvolveConfig(dt=1e-4, t_final=1.0, reference=WaveParams(omega=1.0, c=0.0))
    record = record_invariants(u0, config)
    assert record.action == pytest.approx(math.pi, rel=1e-9)
    assert record.jc == pytest.approx(math.pi, rel=1e-8)
    assert abs(record.nehari) < 1e-8


def test_evolve_config_validation():
    """Test that dt and t_final must be positive and the stride at least 1."""
    with pytest.raises(ValueError):
        EvolveConfig(dt=0.0, t_final=1.0)
    with pytest.raises(ValueError):
        EvolveConfig(dt=1e-3, t_final=1.0, snapshot_stride=0)
