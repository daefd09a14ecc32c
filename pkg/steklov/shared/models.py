from enum import Enum
from typing import Annotated, Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, BeforeValidator, Field, field_validator, model_validator


def as_complex(value) -> complex:
    if isinstance(value, (tuple, list)):
        return complex(value[0], value[1])
    return complex(value)


# Complex scalars; pairs (re, im) and real numbers are accepted
Complex = Annotated[complex, BeforeValidator(as_complex)]


# Enums
class MeshKind(str, Enum):
    SPHERE = "sphere"
    CHART = "chart-graph"
    FILE = "file"


class OperatorLabel(str, Enum):
    CAUCHY = "cauchy"
    LAMBDA = "lambda"
    SINGLE_LAYER = "single_layer"
    PS_INTERIOR = "ps_interior"
    PS_EXTERIOR = "ps_exterior"
    COMPOSITE = "composite"


class ResolventKind(str, Enum):
    FREE = "free"
    MIT = "mit"
    EXTERIOR_MIT = "exterior_mit"
    FULL = "full"


class Side(str, Enum):
    INTERIOR = "interior"
    EXTERIOR = "exterior"


class Command(str, Enum):
    CHECK_IDENTITIES = "check-identities"
    ASSEMBLE = "assemble"
    PS_COMPARE = "ps-compare"
    EIG_MIT = "eig-mit"
    EIG_STEP = "eig-step"
    RATE_RESOLVENT = "rate-resolvent"
    RATE_EIG = "rate-eig"
    PARAMETRIX = "parametrix"


# Result records
class CheckResult(BaseModel):
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: Optional[str] = None

    @classmethod
    def upper_bound(cls, name: str, value: float, tolerance: float, detail: Optional[str] = None):
        return cls(name=name, value=float(value), tolerance=float(tolerance),
                   passed=bool(value <= tolerance), detail=detail)

    @classmethod
    def within(cls, name: str, value: float, target: float, tolerance: float, detail: Optional[str] = None):
        return cls(name=name, value=float(value), tolerance=float(tolerance),
                   passed=bool(abs(value - target) <= tolerance), detail=detail)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name}: value={self.value:.6g} tolerance={self.tolerance:.3g}"
        if self.detail:
            text += f" ({self.detail})"
        return text


class RateFit(BaseModel):
    slope: float
    intercept: float
    r2: float


class SpectralScan(BaseModel):
    grid: List[float]
    sigma_min: List[float]
    failed: List[int] = Field(default_factory=list)
    m: float
    M: Optional[float] = None
    label: str = "birman_schwinger"
    # ScanProblem that produced the scan; refinement re-evaluates it
    problem: Optional[Any] = Field(default=None, exclude=True, repr=False)

    @model_validator(mode="after")
    def check_grid(self):
        if len(self.grid) != len(self.sigma_min):
            raise ValueError("grid and sigma_min lengths differ")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("scan grid must be strictly increasing")
        return self


class EigenResult(BaseModel):
    value: float
    residual: float
    multiplicity_hint: int
    bracket: Tuple[float, float]


class OracleEigenvalue(BaseModel):
    value: float
    kappa: int
    degeneracy: int


# Run configuration
class MeshSpec(BaseModel):
    kind: MeshKind = MeshKind.SPHERE
    R: float = 1.0
    order: int = 12
    path: Optional[str] = None

    class Config:
        extra = "forbid"

    @field_validator("R")
    @classmethod
    def positive_radius(cls, v):
        if v <= 0:
            raise ValueError("R must be positive")
        return v

    @field_validator("order")
    @classmethod
    def even_order(cls, v):
        if v < 4 or v % 2:
            raise ValueError("order must be even and >= 4")
        return v

    @model_validator(mode="after")
    def file_needs_path(self):
        if self.kind == MeshKind.FILE and not self.path:
            raise ValueError("mesh kind 'file' requires path")
        return self


class RunConfig(BaseModel):
    command: Command
    mesh: MeshSpec = Field(default_factory=MeshSpec)
    m: float = 1.0
    M: Optional[float] = None
    M_list: List[float] = Field(default_factory=list)
    z: Tuple[float, float] = (0.0, 0.0)
    interval: Optional[Tuple[float, float]] = None
    steps: int = 64
    output: str = "."
    seed: int = 0
    threads: Optional[int] = None
    label: OperatorLabel = OperatorLabel.CAUCHY
    l_values: List[int] = Field(default_factory=lambda: [8, 16, 32])
    semiclassical_masses: List[float] = Field(default_factory=lambda: [8.0, 16.0])
    j_max: int = 1

    class Config:
        extra = "forbid"

    @field_validator("m")
    @classmethod
    def positive_mass(cls, v):
        if v <= 0:
            raise ValueError("m must be positive")
        return v

    @field_validator("M")
    @classmethod
    def positive_coupling(cls, v):
        if v is not None and v <= 0:
            raise ValueError("M must be positive")
        return v

    @field_validator("M_list")
    @classmethod
    def positive_couplings(cls, v):
        if any(x <= 0 for x in v):
            raise ValueError("M must be positive")
        return sorted(v)

    @field_validator("steps")
    @classmethod
    def enough_steps(cls, v):
        if v < 8:
            raise ValueError("steps must be >= 8")
        return v

    @field_validator("interval")
    @classmethod
    def ordered_interval(cls, v):
        if v is not None and not v[0] < v[1]:
            raise ValueError("interval must satisfy lo < hi")
        return v

    @field_validator("l_values")
    @classmethod
    def positive_frequencies(cls, v):
        if any(x <= 0 for x in v):
            raise ValueError("l_values must be positive")
        return v

    @field_validator("threads")
    @classmethod
    def positive_threads(cls, v):
        if v is not None and v <= 0:
            raise ValueError("threads must be positive")
        return v

    @property
    def spectral_parameter(self) -> complex:
        return complex(self.z[0], self.z[1])

    @property
    def couplings(self) -> List[float]:
        if self.M_list:
            return self.M_list
        return [self.M] if self.M is not None else []


class RunSummary(BaseModel):
    command: Command
    config: Dict
    checks: List[CheckResult] = Field(default_factory=list)
    values: Dict[str, float] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)
