"""Data models for parameters, invariant records and experiment reports."""

import math
from enum import Enum
from typing import Dict, List, Optional
from pydantic import BaseModel, ConfigDict, computed_field, field_validator

CRITICAL_B = -3.0 / 16.0
# b within this distance of -3/16 is treated as gamma == 0
CRITICAL_B_TOLERANCE = 1e-14


class ModelParams(BaseModel):
    """The quintic coefficient b and the derived gamma = 1 + 16b/3."""

    model_config = ConfigDict(frozen=True)

    b: float

    @field_validator("b")
    @classmethod
    def check_finite(cls, v: float) -> float:
        """Reject NaN and infinite coefficients."""
        if not math.isfinite(v):
            raise ValueError("b must be finite")
        return v

    @classmethod
    def from_gamma(cls, gamma: float) -> "ModelParams":
        """Build parameters from gamma instead of b."""
        return cls(b=3.0 * (gamma - 1.0) / 16.0)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def gamma(self) -> float:
        if self.is_critical:
            return 0.0
        return 1.0 + 16.0 * self.b / 3.0

    @property
    def is_critical(self) -> bool:
        """True when b = -3/16, i.e. gamma vanishes."""
        return abs(self.b - CRITICAL_B) <= CRITICAL_B_TOLERANCE

    @property
    def gamma_sign(self) -> int:
        if self.is_critical:
            return 0
        return 1 if self.b > CRITICAL_B else -1


class WaveParams(BaseModel):
    """Frequency omega and velocity c of a soliton, with s = c / (2 sqrt(omega))."""

    model_config = ConfigDict(frozen=True)

    omega: float
    c: float

    @field_validator("omega")
    @classmethod
    def check_omega(cls, v: float) -> float:
        """Frequencies must be positive and finite."""
        if not math.isfinite(v) or v <= 0:
            raise ValueError(f"omega must be positive, got {v}")
        return v

    @field_validator("c")
    @classmethod
    def check_c(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("c must be finite")
        return v

    @classmethod
    def from_s(cls, omega: float, s: float) -> "WaveParams":
        """Build (omega, c) from the normalized velocity s."""
        return cls(omega=omega, c=2.0 * s * math.sqrt(omega))

    @computed_field  # type: ignore[prop-decorator]
    @property
    def s(self) -> float:
        return self.c / (2.0 * math.sqrt(self.omega))


class RegionTag(str, Enum):
    """Existence regions for the two-parameter soliton family."""

    EXPONENTIAL_INTERIOR = "exponential_interior"
    ALGEBRAIC_BOUNDARY = "algebraic_boundary"
    INADMISSIBLE = "inadmissible"


class ParamRegion(BaseModel):
    """Classification of (omega, c) for a given gamma."""

    model_config = ConfigDict(frozen=True)

    tag: RegionTag
    omega: float
    c: float
    gamma: float
    # sqrt(-gamma / (1 - gamma)); only defined for gamma <= 0
    s_star_lower: Optional[float] = None

    @property
    def admissible(self) -> bool:
        return self.tag != RegionTag.INADMISSIBLE

    @property
    def is_algebraic(self) -> bool:
        return self.tag == RegionTag.ALGEBRAIC_BOUNDARY

    def describe_interval(self) -> str:
        """Human readable admissible interval for c at this omega."""
        root = 2.0 * math.sqrt(self.omega)
        if self.s_star_lower is None:
            return f"-{root:.6g} < c <= {root:.6g} (gamma > 0)"
        upper = -self.s_star_lower * root
        return f"-{root:.6g} < c < {upper:.6g} (gamma <= 0)"


class ClosedFormInvariants(BaseModel):
    """Closed-form mass, momentum, energy and action of the gauge-form soliton."""

    omega: float
    c: float
    gamma: float
    mass: float
    momentum: float
    energy: float
    action_d: float
    alpha: float


class InvariantRecord(BaseModel):
    """Conserved quantities of a field plus optional variational functionals."""

    energy: float
    mass: float
    momentum: float
    action: Optional[float] = None
    nehari: Optional[float] = None
    jc: Optional[float] = None

    @field_validator("mass")
    @classmethod
    def check_mass(cls, v: float) -> float:
        if v < 0:
            raise ValueError(f"mass must be non-negative, got {v}")
        return v

    @property
    def nehari_sign(self) -> Optional[int]:
        if self.nehari is None:
            return None
        return int(math.copysign(1, self.nehari)) if self.nehari != 0 else 0


class WellTag(str, Enum):
    """Potential-well membership labels."""

    A_PLUS = "A+"
    A_MINUS = "A-"
    B_PLUS = "B+"
    B_MINUS = "B-"
    OUTSIDE = "outside"


class WellMembership(BaseModel):
    """Margins of a field against the potential wells at (omega, c).

    Margins within ``tolerance`` of zero count as the boundary, which belongs
    to no well.
    """

    s_margin: float
    nehari: float
    j_margin: float
    tolerance: float = 1e-9

    @computed_field  # type: ignore[prop-decorator]
    @property
    def a_plus(self) -> bool:
        return self.s_margin < -self.tolerance and self.nehari > self.tolerance

    @computed_field  # type: ignore[prop-decorator]
    @property
    def a_minus(self) -> bool:
        return self.s_margin < -self.tolerance and self.nehari < -self.tolerance

    @computed_field  # type: ignore[prop-decorator]
    @property
    def b_plus(self) -> bool:
        return self.s_margin < -self.tolerance and self.j_margin < -self.tolerance

    @computed_field  # type: ignore[prop-decorator]
    @property
    def b_minus(self) -> bool:
        return self.s_margin < -self.tolerance and self.j_margin > self.tolerance

    @property
    def tags(self) -> List[WellTag]:
        found = []
        if self.a_plus:
            found.append(WellTag.A_PLUS)
        if self.a_minus:
            found.append(WellTag.A_MINUS)
        if self.b_plus:
            found.append(WellTag.B_PLUS)
        if self.b_minus:
            found.append(WellTag.B_MINUS)
        return found

    @property
    def tag(self) -> WellTag:
        """Primary label, preferring the Nehari-sign wells."""
        found = self.tags
        return found[0] if found else WellTag.OUTSIDE


class Equation(str, Enum):
    """Evolution equation: the DNLS form for u or its gauge form for v."""

    DNLS = "dnls"
    GAUGE = "gauge"


class PerturbationKind(str, Enum):
    EVEN_BUMP = "even_bump"
    ODD_BUMP = "odd_bump"
    RANDOM_SMOOTH = "random_smooth"
    SCALING = "scaling"


class ReportFormat(str, Enum):
    TERMINAL = "terminal"
    MARKDOWN = "markdown"
    CSV = "csv"


class EvolveConfig(BaseModel):
    """Time integration settings."""

    model_config = ConfigDict(frozen=True)

    equation: Equation = Equation.DNLS
    dt: float
    t_final: float
    snapshot_stride: int = 100
    b: float = 0.0
    nonlinearity_scale: float = 1.0
    edge_tolerance: float = 1e-8
    blowup_threshold: float = 1e6
    safety: float = 0.2
    # Optional (omega, c) for recording action, Nehari and J_c at snapshots
    reference: Optional[WaveParams] = None

    @field_validator("dt", "t_final")
    @classmethod
    def check_positive(cls, v: float) -> float:
        if not math.isfinite(v) or v <= 0:
            raise ValueError(f"must be positive, got {v}")
        return v

    @field_validator("snapshot_stride")
    @classmethod
    def check_stride(cls, v: int) -> int:
        if v < 1:
            raise ValueError("snapshot_stride must be at least 1")
        return v

    @property
    def params(self) -> ModelParams:
        return ModelParams(b=self.b)


class StabilityReport(BaseModel):
    """Time series and verdict of one perturbed-soliton run."""

    b: float
    omega: float
    c: float
    delta: float
    kind: PerturbationKind
    seed: int
    equation: Equation
    t_final: float
    times: List[float] = []
    distances: List[float] = []
    theta_opt: List[float] = []
    y_opt: List[float] = []
    nehari_signs: List[Optional[int]] = []
    jc_values: List[Optional[float]] = []
    corridor_lower: List[Optional[float]] = []
    corridor_upper: List[Optional[float]] = []
    drift: Dict[str, float] = {}
    edge_ratio_max: float = 0.0
    blew_up: bool = False
    blowup_time: Optional[float] = None
    initial_well: WellTag = WellTag.OUTSIDE
    corridor_epsilon: Optional[float] = None

    @computed_field  # type: ignore[prop-decorator]
    @property
    def sup_distance(self) -> float:
        return max(self.distances) if self.distances else float("nan")

    @computed_field  # type: ignore[prop-decorator]
    @property
    def ratio(self) -> float:
        if self.delta == 0:
            return float("nan")
        return self.sup_distance / self.delta

    @computed_field  # type: ignore[prop-decorator]
    @property
    def drift_valid(self) -> bool:
        return bool(self.drift) and max(self.drift.values()) < 1e-7

    @computed_field  # type: ignore[prop-decorator]
    @property
    def nehari_sign_constant(self) -> Optional[bool]:
        """Whether the Nehari sign held; None unless the data started in A+ or A-."""
        if self.initial_well not in (WellTag.A_PLUS, WellTag.A_MINUS):
            return None
        signs = [s for s in self.nehari_signs if s is not None]
        return len(set(signs)) <= 1

    @computed_field  # type: ignore[prop-decorator]
    @property
    def corridor_ok(self) -> Optional[bool]:
        if self.corridor_epsilon is None:
            return None
        for value, low, high in zip(
            self.jc_values, self.corridor_lower, self.corridor_upper
        ):
            if value is None or low is None or high is None:
                continue
            if not low < value < high:
                return False
        return True


class BoundReport(BaseModel):
    """Global boundedness run under the mass threshold."""

    b: float
    t_final: float
    mass: float
    mass_threshold: float
    times: List[float] = []
    h1_norms: List[float] = []
    blew_up: bool = False
    blowup_time: Optional[float] = None

    @computed_field  # type: ignore[prop-decorator]
    @property
    def mass_margin(self) -> float:
        return self.mass_threshold - self.mass

    @computed_field  # type: ignore[prop-decorator]
    @property
    def below_threshold(self) -> bool:
        return self.mass < self.mass_threshold

    @computed_field  # type: ignore[prop-decorator]
    @property
    def sup_h1(self) -> float:
        return max(self.h1_norms) if self.h1_norms else float("nan")

    @computed_field  # type: ignore[prop-decorator]
    @property
    def bounded(self) -> bool:
        if self.blew_up or not self.h1_norms:
            return False
        return self.sup_h1 < 10.0 * self.h1_norms[0]
