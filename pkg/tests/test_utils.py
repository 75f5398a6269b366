import pytest
from unittest.mock import patch

from soliton_lab.cli.utils import handle_numerical_errors, parse_float_list, write_results
from soliton_lab.config import RunConfig
from soliton_lab.exceptions import (
    BlowUpError,
    ConfigurationError,
    EdgeDecayError,
    InadmissibleParametersError,
)
from soliton_lab.models import ModelParams
from soliton_lab.params import classify


def test_parse_float_list():
    """Test that comma-separated numbers are parsed in order."""
    assert parse_float_list("0.9, 0.99,0.999") == [0.9, 0.99, 0.999]


def test_parse_float_list_skips_empty_items():
    """Test that trailing commas are ignored."""
    assert parse_float_list("1e-2,") == [0.01]


def test_parse_float_list_rejects_garbage():
    """Test that a non-numeric item raises ConfigurationError."""
    with pytest.raises(ConfigurationError):
        parse_float_list("0.1,abc")
    with pytest.raises(ConfigurationError):
        parse_float_list(" , ")


def test_handle_numerical_errors_prints_admissible_interval():
    """Test that the decorator prints the admissible interval, then re-raises."""
    region = classify(1.0, 3.0, ModelParams(b=0.0))

    @handle_numerical_errors
    def failing_func():
        raise InadmissibleParametersError("No soliton", region=region)

    with patch("soliton_lab.cli.utils.rprint") as mock_rprint:
        with pytest.raises(InadmissibleParametersError):
            failing_func()

        printed = " ".join(str(call.args[0]) for call in mock_rprint.call_args_list)
        assert "Admissible velocities" in printed
        assert "-2 < c <= 2" in printed


def test_handle_numerical_errors_hints_on_edge_decay():
    """Test that an edge-decay failure suggests a longer window."""

    @handle_numerical_errors
    def failing_func():
        raise EdgeDecayError("edges", ratio=1e-3, tolerance=1e-8)

    with patch("soliton_lab.cli.utils.rprint") as mock_rprint:
        with pytest.raises(EdgeDecayError):
            failing_func()

        printed = " ".join(str(call.args[0]) for call in mock_rprint.call_args_list)
        assert "--half-length" in printed


def test_handle_numerical_errors_reports_blowup_time():
    """Test that a blow-up is reported with its time."""

    @handle_numerical_errors
    def failing_func():
        raise BlowUpError("boom", time=1.25)

    with patch("soliton_lab.cli.utils.rprint") as mock_rprint:
        with pytest.raises(BlowUpError):
            failing_func()

        assert "t=1.25" in str(mock_rprint.call_args_list[0].args[0])


def test_handle_numerical_errors_passes_results_through():
    """Test that successful calls return their value untouched."""

    @handle_numerical_errors
    def working_func(x):
        return 2 * x

    assert working_func(21) == 42


def test_write_results_creates_config_and_summary(tmp_path):
    """Test that write_results stores config.ini, summary.json and extra files."""
    config = RunConfig(subcommand="threshold").merged({"output": {"out_dir": str(tmp_path / "run")}})

    out_dir = write_results(config, {"mass_threshold": 12.5}, {"extra.csv": "a,b\n1,2\n"})

    assert out_dir == tmp_path / "run"
    assert (out_dir / "config.ini").exists()
    assert '"mass_threshold": 12.5' in (out_dir / "summary.json").read_text()
    assert (out_dir / "extra.csv").read_text() == "a,b\n1,2\n"
