"""Tests for the command wiring and a few end-to-end runs."""

import json
import math
from unittest.mock import patch

import pytest
from typer.testing import CliRunner

from soliton_lab.cli import app, main
from soliton_lab.evolve import run as evolve_run
from soliton_lab.exceptions import (
    BlowUpError,
    ConfigurationError,
    ConvergenceError,
    InadmissibleParametersError,
    ParameterError,
)
from soliton_lab.models import BoundReport, Equation, PerturbationKind, StabilityReport
from soliton_lab.variational import DEFAULT_MAX_ITERS, DEFAULT_TOL

runner = CliRunner()


def _config_of(mock_run):
    mock_run.assert_called_once()
    return mock_run.call_args.args[0]


@patch("soliton_lab.cli.soliton_commands.run_profile")
def test_profile_converts_s_to_c(mock_run):
    """Test that --s is turned into the velocity at the given omega."""
    result = runner.invoke(app, ["profile", "--omega", "4", "--s", "0.5", "-L", "30"])
    assert result.exit_code == 0
    config = _config_of(mock_run)
    assert config.subcommand == "profile"
    assert config.parameters.wave.c == pytest.approx(2.0)
    assert config.grid.half_length == 30.0


@patch("soliton_lab.cli.evolve_commands.run_evolve")
def test_evolve_options(mock_run):
    """Test that evolve flags land in the evolve and experiment blocks."""
    result = runner.invoke(
        app,
        ["evolve", "--b", "0.1", "--equation", "gauge", "--dt", "1e-4", "-T", "2", "--kind", "odd_bump", "--delta", "0.01"],
    )
    assert result.exit_code == 0
    config = _config_of(mock_run)
    assert config.parameters.b == 0.1
    assert config.evolve.equation == Equation.GAUGE
    assert config.evolve.dt == 1e-4
    assert config.evolve.t_final == 2.0
    assert config.experiment.kind == PerturbationKind.ODD_BUMP
    assert config.experiment.delta == 0.01


@patch("soliton_lab.cli.stability_commands.run_stability")
def test_stability_single_delta(mock_run):
    """Test that one delta is stored in the config."""
    result = runner.invoke(app, ["stability", "--omega", "1", "--c", "0.5", "--delta", "0.01"])
    assert result.exit_code == 0
    config = _config_of(mock_run)
    assert config.experiment.deltas == [0.01]


@patch("soliton_lab.cli.stability_commands.run_stability")
def test_stability_delta_sweep(mock_run):
    """Test that a comma-separated delta list becomes a sweep."""
    result = runner.invoke(app, ["stability", "--delta", "0.01, 0.001", "-T", "5"])
    assert result.exit_code == 0
    config = _config_of(mock_run)
    assert config.experiment.deltas == [0.01, 0.001]
    assert config.experiment.horizon == 5.0


@patch("soliton_lab.cli.stability_commands.run_bound")
def test_bound_fraction(mock_run):
    """Test that --fraction lands in the study block."""
    result = runner.invoke(app, ["bound", "--b", "0.2", "--fraction", "0.5"])
    assert result.exit_code == 0
    config = _config_of(mock_run)
    assert config.parameters.b == 0.2
    assert config.study.mass_fraction == 0.5


@patch("soliton_lab.cli.soliton_commands.run_converge")
def test_converge_list(mock_run):
    """Test the s list and Sobolev order."""
    result = runner.invoke(app, ["converge", "--b", "-0.1", "--s", "0.9,0.99", "--m", "2"])
    assert result.exit_code == 0
    config = _config_of(mock_run)
    assert config.study.s_values == [0.9, 0.99]
    assert config.study.sobolev_order == 2


@patch("soliton_lab.cli.variational_commands.run_massmin")
def test_massmin_mass(mock_run):
    """Test that --mass and the solver defaults land in the solver block."""
    result = runner.invoke(app, ["massmin", "--b", "-0.225", "--c", "-1", "--mass", "3.5"])
    assert result.exit_code == 0
    config = _config_of(mock_run)
    assert config.parameters.c == -1.0
    assert config.solver.mass == 3.5
    assert config.solver.max_iters == DEFAULT_MAX_ITERS
    assert config.solver.tol == DEFAULT_TOL


@patch("soliton_lab.cli.variational_commands.run_nehari")
def test_nehari_csv_dump(mock_run):
    """Test that --csv switches the minimizer dump format."""
    result = runner.invoke(app, ["nehari", "--csv", "--tol", "1e-6"])
    assert result.exit_code == 0
    config = _config_of(mock_run)
    assert config.output.binary is False
    assert config.solver.tol == 1e-6


@patch("soliton_lab.cli.soliton_commands.run_threshold")
def test_config_file_then_flags(mock_run, tmp_path):
    """Test that flags override values from --config."""
    path = tmp_path / "run.ini"
    path.write_text("[parameters]\nb = 0.2\nomega = 3.0\n")
    result = runner.invoke(app, ["--config", str(path), "threshold", "--b", "0.1"])
    assert result.exit_code == 0
    config = _config_of(mock_run)
    assert config.parameters.b == 0.1
    assert config.parameters.omega == 3.0


def test_inadmissible_parameters_raise():
    """Test that parameters without a soliton surface as InadmissibleParametersError."""
    result = runner.invoke(app, ["profile", "--omega", "1", "--c", "3"])
    assert result.exit_code != 0
    assert isinstance(result.exception, InadmissibleParametersError)


def test_bad_grid_size_raises():
    """Test that a grid size that is not a power of two is rejected."""
    result = runner.invoke(app, ["profile", "-N", "100"])
    assert isinstance(result.exception, ParameterError)


def test_hessian_and_threshold_end_to_end(tmp_path):
    """Test real hessian and threshold runs, then aggregate them."""
    hessian_dir = tmp_path / "hessian"
    result = runner.invoke(app, ["hessian", "--omega", "1", "--c", "0", "--b", "0", "--out", str(hessian_dir)])
    assert result.exit_code == 0
    summary = json.loads((hessian_dir / "summary.json").read_text())
    assert summary["closed_det"] == pytest.approx(-1.0)
    assert summary["fd_det"] == pytest.approx(-1.0, rel=1e-4)
    assert (hessian_dir / "config.ini").exists()

    threshold_dir = tmp_path / "threshold"
    result = runner.invoke(app, ["threshold", "--b", "0", "--out", str(threshold_dir)])
    assert result.exit_code == 0
    summary = json.loads((threshold_dir / "summary.json").read_text())
    assert summary["mass_threshold"] == pytest.approx(4.0 * math.pi)

    result = runner.invoke(
        app, ["report", str(tmp_path), "--format", "csv", "--out", str(tmp_path / "aggregate")]
    )
    assert result.exit_code == 0
    lines = result.stdout.strip().split("\n")
    assert lines[0].startswith("run,")
    assert lines[1].startswith("hessian,")
    assert lines[2].startswith("threshold,")
    assert (tmp_path / "aggregate" / "report.csv").read_text().splitlines() == lines
    assert (tmp_path / "aggregate" / "config.ini").exists()


def test_report_markdown_empty(tmp_path):
    """Test the markdown report of an empty sweep."""
    result = runner.invoke(app, ["report", str(tmp_path), "-f", "markdown", "--out", str(tmp_path / "md")])
    assert result.exit_code == 0
    assert "No summaries found" in result.stdout


def _stability_report(delta, blew_up=False, blowup_time=None):
    return StabilityReport(
        b=0.0,
        omega=1.0,
        c=0.0,
        delta=delta,
        kind=PerturbationKind.EVEN_BUMP,
        seed=0,
        equation=Equation.DNLS,
        t_final=1.0,
        times=[0.0, 1.0],
        distances=[delta, 2.0 * delta],
        blew_up=blew_up,
        blowup_time=blowup_time,
    )


def test_nehari_without_convergence_exits_with_numerical_code(tmp_path):
    """Test that a capped Nehari descent writes its outputs, then exits with code 3."""
    argv = [
        "soliton-lab", "nehari", "--b", "0", "--omega", "1", "--c", "0",
        "--max-iters", "1", "--tol", "1e-14", "-L", "10", "-N", "64", "--out", str(tmp_path),
    ]
    with patch("sys.argv", argv):
        with pytest.raises(SystemExit) as excinfo:
            main()
    assert excinfo.value.code == 3
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["converged"] is False
    assert (tmp_path / "config.ini").exists()


def test_nehari_without_convergence_raises_convergence_error(tmp_path):
    """Test the error carried out of the command when the descent is capped."""
    result = runner.invoke(
        app,
        ["nehari", "--max-iters", "1", "--tol", "1e-14", "-L", "10", "-N", "64", "--out", str(tmp_path)],
    )
    assert isinstance(result.exception, ConvergenceError)
    assert result.exception.iterations == 1
    assert result.exception.exit_code == 3


@patch("soliton_lab.cli.stability_commands.global_bound_experiment")
def test_bound_blowup_exits_with_numerical_code(mock_bound, tmp_path):
    """Test that a blown-up bound run writes its summary, then exits with code 3."""
    mock_bound.return_value = BoundReport(
        b=0.0, t_final=1.0, mass=1.0, mass_threshold=4.0 * math.pi,
        times=[0.0], h1_norms=[1.0], blew_up=True, blowup_time=0.25,
    )
    with patch("sys.argv", ["soliton-lab", "bound", "-T", "1", "--out", str(tmp_path)]):
        with pytest.raises(SystemExit) as excinfo:
            main()
    assert excinfo.value.code == 3
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["blew_up"] is True
    assert summary["blowup_time"] == 0.25


def test_evolve_blowup_exits_with_numerical_code(tmp_path):
    """Test that a blown-up evolution writes its summary, then exits with code 3."""

    def low_threshold_run(u0, config):
        return evolve_run(u0, config.model_copy(update={"blowup_threshold": 1.0}))

    argv = ["soliton-lab", "evolve", "-T", "0.01", "-L", "20", "-N", "512", "--out", str(tmp_path)]
    with patch("soliton_lab.cli.evolve_commands.run", side_effect=low_threshold_run):
        with patch("sys.argv", argv):
            with pytest.raises(SystemExit) as excinfo:
                main()
    assert excinfo.value.code == 3
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["blew_up"] is True
    assert summary["blowup_time"] == pytest.approx(1e-3)
    assert (tmp_path / "trajectory.csv").exists()


@patch("soliton_lab.cli.stability_commands.run_sweep")
def test_stability_sweep_blowup_raises_after_writing(mock_sweep, tmp_path):
    """Test that any blown-up run in a sweep surfaces as BlowUpError with its time."""
    mock_sweep.return_value = [_stability_report(0.01), _stability_report(0.001, True, 0.4)]
    result = runner.invoke(app, ["stability", "--delta", "0.01,0.001", "-T", "1", "--out", str(tmp_path)])
    assert isinstance(result.exception, BlowUpError)
    assert result.exception.time == 0.4
    assert (tmp_path / "delta_01" / "summary.json").exists()


@patch("soliton_lab.cli.stability_commands.run_sweep")
def test_stability_sweep_rerun_from_saved_config(mock_sweep, tmp_path):
    """Test that the delta list is saved and drives a rerun from config.ini."""
    mock_sweep.return_value = [_stability_report(0.01), _stability_report(0.001)]
    first = tmp_path / "first"
    result = runner.invoke(app, ["stability", "--delta", "0.01,0.001", "-T", "1", "--out", str(first)])
    assert result.exit_code == 0
    assert "deltas = 0.01,0.001" in (first / "config.ini").read_text()

    second = tmp_path / "second"
    result = runner.invoke(app, ["--config", str(first / "config.ini"), "stability", "--out", str(second)])
    assert result.exit_code == 0
    jobs = mock_sweep.call_args.args[0]
    assert [job.delta for job in jobs] == [0.01, 0.001]
    assert [job.t_final for job in jobs] == [1.0, 1.0]
    for name in ("delta_00", "delta_01"):
        assert (first / name / "summary.json").read_bytes() == (second / name / "summary.json").read_bytes()


@pytest.mark.parametrize(
    "args",
    [
        ["hessian", "--omega", "1", "--c", "0.5", "--b", "0.1", "--h", "1e-4"],
        ["sstar", "--b", "0.5", "--samples", "20"],
        ["threshold", "--b", "-0.1"],
    ],
)
def test_rerun_from_saved_config_is_identical(args, tmp_path):
    """Test that rerunning from the written config.ini reproduces the outputs byte for byte."""
    first = tmp_path / "first"
    result = runner.invoke(app, args + ["--out", str(first)])
    assert result.exit_code == 0

    second = tmp_path / "second"
    result = runner.invoke(app, ["--config", str(first / "config.ini"), args[0], "--out", str(second)])
    assert result.exit_code == 0
    for path in sorted(first.iterdir()):
        if path.name == "config.ini":
            continue
        assert path.read_bytes() == (second / path.name).read_bytes()


@patch("soliton_lab.cli.soliton_commands.run_converge")
def test_converge_settings_come_back_from_config(mock_run, tmp_path):
    """Test that s values and Sobolev order are read back from a saved config."""
    path = tmp_path / "config.ini"
    path.write_text("[study]\ns_values = 0.9,0.95\nsobolev_order = 0\n")
    result = runner.invoke(app, ["--config", str(path), "converge"])
    assert result.exit_code == 0
    config = _config_of(mock_run)
    assert config.study.s_values == [0.9, 0.95]
    assert config.study.sobolev_order == 0


def test_report_rerun_from_saved_config(tmp_path):
    """Test that the report command records its directory and format for reruns."""
    runner.invoke(app, ["threshold", "--b", "0", "--out", str(tmp_path / "runs" / "threshold")])
    first = tmp_path / "first"
    result = runner.invoke(app, ["report", str(tmp_path / "runs"), "-f", "markdown", "--out", str(first)])
    assert result.exit_code == 0

    second = tmp_path / "second"
    result = runner.invoke(app, ["--config", str(first / "config.ini"), "report", "--out", str(second)])
    assert result.exit_code == 0
    assert (first / "report.md").read_bytes() == (second / "report.md").read_bytes()


def test_report_without_directory_is_rejected():
    """Test that report needs a directory from the argument or the config."""
    result = runner.invoke(app, ["report"])
    assert isinstance(result.exception, ConfigurationError)
