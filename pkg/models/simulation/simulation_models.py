from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.decision.decision_models import DecisionRuleSpec
from models.process.process_models import ProcessFamily, SeedPath


class CalibrationMode(str, Enum):
    ONE_SIDED = "one_sided"
    CENTERED = "centered"


class EstimatorKind(str, Enum):
    CPK = "cpk"
    CNPK = "cnpk"


class MisclassType(str, Enum):
    TYPE1 = "type1"
    TYPE2 = "type2"


class SigmaCSource(str, Enum):
    CLOSED_FORM = "closed_form"
    EMPIRICAL = "empirical"


class SimulationConfig(BaseModel):
    """Sampling model family, calibration mode and estimator of a Monte Carlo run."""

    model_config = ConfigDict(frozen=True)

    family: ProcessFamily = ProcessFamily.NORMAL
    calibration_mode: CalibrationMode = CalibrationMode.ONE_SIDED
    estimator: EstimatorKind = EstimatorKind.CPK
    log_sigma: float = Field(default=0.25, gt=0)


class MisclassEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    cpk_true: float
    n: int
    c0: float
    reps: int
    accepted: int
    p_accept: float
    misclass: float
    misclass_type: MisclassType
    mc_se: float
    zero_variance_retries: int = 0


class RiskSurface(BaseModel):
    model_config = ConfigDict(frozen=True)

    c0: float
    cpk_grid: List[float]
    n_grid: List[int]
    cells: List[List[MisclassEstimate]]
    config: SimulationConfig
    reps: int
    base_seed: SeedPath

    @model_validator(mode="after")
    def validate_shape(self):
        if len(self.cells) != len(self.cpk_grid) or any(len(row) != len(self.n_grid) for row in self.cells):
            raise ValueError("cells must be |cpk_grid| x |n_grid|")
        return self


class CollapsePoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    z: float
    n: int
    cpk_true: float
    sigma_c: float
    p_mc: float
    phi_z: float
    residual: float
    mc_se: float


class SkippedCollapseCell(BaseModel):
    z: float
    n: int
    cpk_true: float
    reason: str


class ScalingCollapse(BaseModel):
    c0: float
    reps: int
    sigma_c_source: SigmaCSource
    points: List[CollapsePoint]
    skipped: List[SkippedCollapseCell] = []

    def max_abs_residual(self, n: int) -> float:
        values = [abs(p.residual) for p in self.points if p.n == n]
        if not values:
            raise ValueError(f"no collapse points for n={n}")
        return max(values)


class SamplingHistogram(BaseModel):
    n: int
    counts: List[int]
    mass: List[float]
    tail_below_c0: float
    mean: float
    sd: float


class SamplingDistribution(BaseModel):
    cpk_true: float
    c0: float
    reps: int
    bin_edges: List[float]
    histograms: List[SamplingHistogram]


class AcceptanceSurface(BaseModel):
    """Per-cell fraction of replicates a decision rule accepts."""

    rule: DecisionRuleSpec
    cpk_grid: List[float]
    n_grid: List[int]
    acceptance: List[List[float]]
    reps: int
    config: SimulationConfig
    base_seed: SeedPath


class RuleBoundary(BaseModel):
    """Interpolated cpk_true at which acceptance crosses ``level`` for one n."""

    n: int
    level: float
    cpk_true: Optional[float] = None
