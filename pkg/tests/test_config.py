from pathlib import Path

import pytest

from soliton_lab.config import CONFIG_FILENAME, GridBlock, ParametersBlock, RunConfig, resolve_run_config
from soliton_lab.exceptions import ConfigurationError, OutputError
from soliton_lab.models import Equation, PerturbationKind, ReportFormat
from soliton_lab.spectral import SpectralGrid
from soliton_lab.variational import DEFAULT_MAX_ITERS, DEFAULT_TOL


def test_defaults():
    """Test the built-in defaults."""
    config = RunConfig()
    assert config.parameters.b == 0.0
    assert config.parameters.wave.omega == 1.0
    assert config.parameters.wave.c == 0.0
    assert config.evolve.equation == Equation.DNLS
    assert config.experiment.kind == PerturbationKind.EVEN_BUMP
    assert config.experiment.horizon == 20.0
    assert config.output.binary


def test_out_dir_defaults_to_runs_subcommand():
    """Test runs/<subcommand> unless --out is given."""
    config = RunConfig(subcommand="evolve")
    assert config.out_dir() == Path("runs") / "evolve"
    moved = config.merged({"output": {"out_dir": "elsewhere"}})
    assert moved.out_dir() == Path("elsewhere")


def test_velocity_from_s():
    """Test that s is turned into c = 2 s sqrt(omega)."""
    block = ParametersBlock(omega=4.0, s=0.5)
    assert block.wave.c == pytest.approx(2.0)


def test_c_and_s_are_exclusive():
    """Test that giving both c and s is a configuration error."""
    with pytest.raises(ConfigurationError):
        RunConfig.from_ini("[parameters]\nc = 1.0\ns = 0.5\n")


def test_merged_ignores_none_and_swaps_velocity():
    """Test that None leaves values alone and c replaces s."""
    base = RunConfig().merged({"parameters": {"b": 0.2, "s": 0.5}})
    merged = base.merged({"parameters": {"b": None, "c": 1.0}})
    assert merged.parameters.b == 0.2
    assert merged.parameters.c == 1.0
    assert merged.parameters.s is None


def test_merged_rejects_unknown_block_and_key():
    """Test that unknown blocks and keys are configuration errors."""
    with pytest.raises(ConfigurationError):
        RunConfig().merged({"plotting": {"dpi": 100}})
    with pytest.raises(ConfigurationError):
        RunConfig().merged({"parameters": {"mass": 1.0}})


def test_invalid_values_are_reported():
    """Test that pydantic validation errors become ConfigurationError."""
    with pytest.raises(ConfigurationError) as exc_info:
        RunConfig().merged({"evolve": {"t_final": -1.0}})
    assert "evolve.t_final" in str(exc_info.value)


def test_grid_block_fills_defaults():
    """Test that unset grid fields come from the default windows."""
    assert GridBlock(half_length=10.0).grid() == SpectralGrid(10.0, 2048)
    assert GridBlock(n_points=512).grid(algebraic=True) == SpectralGrid(400.0, 512)


def test_ini_roundtrip():
    """Test that a saved config reads back unchanged."""
    config = RunConfig(subcommand="stability").merged(
        {
            "parameters": {"b": -0.1, "omega": 2.0, "c": -1.25},
            "grid": {"half_length": 30.0, "n_points": 1024},
            "evolve": {"equation": Equation.GAUGE, "dt": 1e-4, "snapshot_stride": 50},
            "experiment": {"delta": 0.01, "kind": PerturbationKind.RANDOM_SMOOTH, "seed": 3},
            "output": {"dump_fields": True, "binary": False},
        }
    )
    text = config.to_ini()
    assert "[parameters]" in text
    assert "equation = gauge" in text
    assert RunConfig.from_ini(text) == config


def test_from_ini_malformed():
    """Test that text without sections is rejected."""
    with pytest.raises(ConfigurationError):
        RunConfig.from_ini("b = 1\n")


def test_load_missing_file(tmp_path):
    """Test that a missing config file is a configuration error."""
    with pytest.raises(ConfigurationError):
        RunConfig.load(tmp_path / "missing.ini")


def test_resolve_order(tmp_path):
    """Test defaults < config file < flags."""
    path = tmp_path / "run.ini"
    path.write_text("[parameters]\nb = 0.2\nomega = 2.0\n\n[evolve]\nt_final = 3.0\n")
    config = resolve_run_config("evolve", path, {"parameters": {"b": 0.3}})
    assert config.subcommand == "evolve"
    assert config.parameters.b == 0.3
    assert config.parameters.omega == 2.0
    assert config.evolve.t_final == 3.0
    assert config.evolve.snapshot_stride == 100


def test_resolve_without_file():
    """Test that flags apply on top of the defaults."""
    config = resolve_run_config("soliton", None, {"parameters": {"omega": 4.0}})
    assert config.parameters.omega == 4.0
    assert config.parameters.b == 0.0


def test_save_and_load(tmp_path):
    """Test save() writes config.ini that load() reads back."""
    config = RunConfig(subcommand="nehari").merged({"parameters": {"b": 0.1, "c": 0.5}})
    path = config.save(tmp_path / "out")
    assert path.name == CONFIG_FILENAME
    assert RunConfig.load(path) == config


def test_save_error(tmp_path):
    """Test that an unwritable directory raises OutputError."""
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OutputError):
        RunConfig().save(blocker)


def test_study_solver_and_report_blocks_roundtrip():
    """Test that study, solver and report settings survive config.ini."""
    config = RunConfig(subcommand="converge").merged(
        {
            "study": {"s_values": [0.9, 0.99], "sobolev_order": 2, "fd_step": 1e-4, "samples": 50},
            "solver": {"max_iters": 10, "tol": 1e-6, "mass": 3.5},
            "report": {"directory": "runs", "format": ReportFormat.MARKDOWN},
            "experiment": {"deltas": [0.01, 0.001]},
        }
    )
    text = config.to_ini()
    assert "s_values = 0.9,0.99" in text
    assert "deltas = 0.01,0.001" in text
    assert "format = markdown" in text
    assert RunConfig.from_ini(text) == config


def test_float_lists_from_ini_text():
    """Test that comma-separated lists in a config file become float lists."""
    config = RunConfig.from_ini("[experiment]\ndeltas = 0.02, 0.01\n\n[study]\ns_values = 0.5\n")
    assert config.experiment.deltas == [0.02, 0.01]
    assert config.study.s_values == [0.5]


def test_study_and_solver_defaults():
    """Test the defaults of the study and solver blocks."""
    config = RunConfig()
    assert config.study.s_values == [0.9, 0.99, 0.999]
    assert config.study.sobolev_order == 1
    assert config.study.samples == 200
    assert config.study.mass_fraction == 0.9
    assert config.solver.max_iters == DEFAULT_MAX_ITERS
    assert config.solver.tol == DEFAULT_TOL
    assert config.solver.mass is None
    assert config.experiment.deltas is None


@pytest.mark.parametrize(
    "overrides",
    [
        {"study": {"sobolev_order": 3}},
        {"study": {"samples": 1}},
        {"study": {"mass_fraction": 0.0}},
        {"solver": {"max_iters": 0}},
        {"solver": {"tol": -1.0}},
        {"experiment": {"deltas": "0.01,abc"}},
    ],
)
def test_invalid_study_and_solver_values(overrides):
    """Test that out-of-range study and solver values are configuration errors."""
    with pytest.raises(ConfigurationError):
        RunConfig().merged(overrides)
