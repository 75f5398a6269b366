"""Run configuration: pydantic blocks stored as flat INI sections."""

import configparser
import io
from pathlib import Path
from typing import Annotated, Any, Dict, List, Mapping, Optional

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    ValidationError,
    field_validator,
    model_validator,
)

from .exceptions import ConfigurationError, OutputError
from .logging_config import get_logger
from .models import Equation, ModelParams, PerturbationKind, ReportFormat, WaveParams
from .spectral import SpectralGrid, default_grid
from .variational import DEFAULT_MAX_ITERS, DEFAULT_TOL

logger = get_logger(__name__)

CONFIG_FILENAME = "config.ini"
BLOCKS = ("parameters", "grid", "evolve", "experiment", "study", "solver", "report", "output")


def _split_floats(value: Any) -> Any:
    """Accept "0.9,0.99" as written in INI files and by list flags."""
    if isinstance(value, str):
        return [float(item) for item in value.split(",") if item.strip()]
    return value


FloatList = Annotated[List[float], BeforeValidator(_split_floats)]


class ParametersBlock(BaseModel):
    """Model and wave parameters; c and s are alternatives."""

    model_config = ConfigDict(extra="forbid")

    b: float = 0.0
    omega: float = 1.0
    c: Optional[float] = None
    s: Optional[float] = None

    @model_validator(mode="after")
    def check_velocity(self) -> "ParametersBlock":
        if self.c is not None and self.s is not None:
            raise ValueError("give either c or s, not both")
        return self

    @property
    def params(self) -> ModelParams:
        return ModelParams(b=self.b)

    @property
    def wave(self) -> WaveParams:
        if self.s is not None:
            return WaveParams.from_s(self.omega, self.s)
        return WaveParams(omega=self.omega, c=self.c or 0.0)


class GridBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    half_length: Optional[float] = None
    n_points: Optional[int] = None

    def grid(self, algebraic: bool = False) -> SpectralGrid:
        """Configured grid, filling unset fields from the default window."""
        fallback = default_grid(algebraic)
        return SpectralGrid(
            self.half_length if self.half_length is not None else fallback.half_length,
            self.n_points if self.n_points is not None else fallback.n_points,
        )


class EvolveBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    equation: Equation = Equation.DNLS
    dt: Optional[float] = None
    t_final: float = 1.0
    snapshot_stride: int = 100

    @field_validator("t_final")
    @classmethod
    def check_horizon(cls, v: float) -> float:
        if v <= 0:
            raise ValueError(f"t_final must be positive, got {v}")
        return v


class ExperimentBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    # Unset means 0 for evolve and 1e-2 for stability
    delta: Optional[float] = None
    # stability sweep; takes precedence over delta
    deltas: Optional[FloatList] = None
    kind: PerturbationKind = PerturbationKind.EVEN_BUMP
    seed: int = 0
    horizon: float = 20.0


class StudyBlock(BaseModel):
    """Knobs of the closed-form studies: converge, hessian, sstar and bound."""

    model_config = ConfigDict(extra="forbid")

    s_values: FloatList = [0.9, 0.99, 0.999]
    sobolev_order: int = 1
    fd_step: Optional[float] = None
    samples: int = 200
    mass_fraction: float = 0.9

    @field_validator("sobolev_order")
    @classmethod
    def check_order(cls, v: int) -> int:
        if v not in (0, 1, 2):
            raise ValueError(f"sobolev_order must be 0, 1 or 2, got {v}")
        return v

    @field_validator("samples")
    @classmethod
    def check_samples(cls, v: int) -> int:
        if v < 2:
            raise ValueError(f"samples must be at least 2, got {v}")
        return v

    @field_validator("mass_fraction")
    @classmethod
    def check_fraction(cls, v: float) -> float:
        if v <= 0:
            raise ValueError(f"mass_fraction must be positive, got {v}")
        return v


class SolverBlock(BaseModel):
    """Iteration controls of the minimizers; mass unset means the soliton mass."""

    model_config = ConfigDict(extra="forbid")

    max_iters: int = DEFAULT_MAX_ITERS
    tol: float = DEFAULT_TOL
    mass: Optional[float] = None

    @field_validator("max_iters")
    @classmethod
    def check_iters(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"max_iters must be at least 1, got {v}")
        return v

    @field_validator("tol", "mass")
    @classmethod
    def check_positive(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and v <= 0:
            raise ValueError(f"must be positive, got {v}")
        return v


class ReportBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    directory: Optional[str] = None
    format: ReportFormat = ReportFormat.TERMINAL


class OutputBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    out_dir: Optional[str] = None
    dump_fields: bool = False
    binary: bool = True


class RunConfig(BaseModel):
    """Everything needed to rerun a subcommand."""

    model_config = ConfigDict(extra="forbid")

    subcommand: str = ""
    parameters: ParametersBlock = ParametersBlock()
    grid: GridBlock = GridBlock()
    evolve: EvolveBlock = EvolveBlock()
    experiment: ExperimentBlock = ExperimentBlock()
    study: StudyBlock = StudyBlock()
    solver: SolverBlock = SolverBlock()
    report: ReportBlock = ReportBlock()
    output: OutputBlock = OutputBlock()

    def out_dir(self) -> Path:
        if self.output.out_dir:
            return Path(self.output.out_dir)
        return Path("runs") / self.subcommand

    def merged(self, overrides: Mapping[str, Mapping[str, Any]]) -> "RunConfig":
        """Return a copy with non-None override values applied per block."""
        data = self.model_dump()
        for block, values in overrides.items():
            if block not in data or not isinstance(data[block], dict):
                raise ConfigurationError(f"Unknown config block: {block}")
            for key, value in values.items():
                if value is not None:
                    data[block][key] = value
        if overrides.get("parameters", {}).get("c") is not None:
            data["parameters"]["s"] = None
        elif overrides.get("parameters", {}).get("s") is not None:
            data["parameters"]["c"] = None
        return _validate(data)

    def to_ini(self) -> str:
        parser = configparser.ConfigParser(interpolation=None)
        parser["run"] = {"subcommand": self.subcommand}
        for block in BLOCKS:
            values = getattr(self, block).model_dump(mode="json")
            parser[block] = {
                key: _format_value(value) for key, value in values.items() if value is not None
            }
        buffer = io.StringIO()
        parser.write(buffer)
        return buffer.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "RunConfig":
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read_string(text)
        except configparser.Error as e:
            raise ConfigurationError(f"Malformed config file: {e}")
        data: Dict[str, Any] = {}
        for section in parser.sections():
            if section == "run":
                data["subcommand"] = parser[section].get("subcommand", "")
                continue
            data[section] = {key: _parse_value(raw) for key, raw in parser[section].items()}
        return _validate(data)

    @classmethod
    def load(cls, path: Path) -> "RunConfig":
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigurationError(f"Cannot read config file {path}: {e}")
        logger.debug(f"Loaded config from {path}")
        return cls.from_ini(text)

    def save(self, directory: Path) -> Path:
        path = directory / CONFIG_FILENAME
        try:
            directory.mkdir(parents=True, exist_ok=True)
            path.write_text(self.to_ini(), encoding="utf-8")
        except OSError as e:
            raise OutputError(f"Cannot write config to {path}: {e}", original_error=e)
        return path


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ",".join(_format_value(item) for item in value)
    return str(value)


def _parse_value(raw: str) -> Any:
    lowered = raw.strip().lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    return raw.strip()


def _validate(data: Dict[str, Any]) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise ConfigurationError(f"Invalid configuration: {problems}")


def resolve_run_config(
    subcommand: str,
    config_path: Optional[Path],
    overrides: Mapping[str, Mapping[str, Any]],
) -> RunConfig:
    """Defaults, then the config file, then command-line flags."""
    base = RunConfig.load(config_path) if config_path else RunConfig()
    resolved = base.merged(overrides)
    resolved = resolved.model_copy(update={"subcommand": subcommand})
    logger.debug(f"Resolved {subcommand} config: {resolved.model_dump(mode='json')}")
    return resolved
