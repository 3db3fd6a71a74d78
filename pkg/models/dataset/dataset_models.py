import math
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.capability.capability_models import ActiveSide, SpecLimits
from models.process.process_models import ProcessFamily, SeedPath
from models.simulation.simulation_models import CalibrationMode


class DimensionRecord(BaseModel):
    """One measured characteristic: its specification and raw measurements.

    nominal is carried as metadata only.
    """

    model_config = ConfigDict(frozen=True)

    dimension_id: str
    spec: SpecLimits
    nominal: Optional[float] = None
    measurements: List[float]

    @field_validator("measurements")
    def validate_measurements(cls, v):
        if any(not math.isfinite(x) for x in v):
            raise ValueError("measurements must be finite")
        return v

    @property
    def n(self) -> int:
        return len(self.measurements)


class NormalityResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    statistic: float
    corrected_statistic: float
    critical_value: Optional[float] = None
    p_value: float
    alpha: float
    passed: bool


class ConcentrationBand(BaseModel):
    half_width: float
    count: int
    share: float


class ConcentrationTable(BaseModel):
    c0: float
    bands: List[ConcentrationBand]
    total: int

    @model_validator(mode="after")
    def validate_monotone(self):
        counts = [b.count for b in self.bands]
        if any(a > b for a, b in zip(counts, counts[1:])):
            raise ValueError("band counts must be nondecreasing in half_width")
        return self


class BootstrapSummary(BaseModel):
    """Bootstrap approval frequency and flip rate of one dimension.

    These describe conditional decision instability given the observed data,
    not the population misclassification probability.
    """

    model_config = ConfigDict(frozen=True)

    dimension_id: str
    n: int
    reps: int
    valid_reps: int
    skipped: int = 0
    cpk_hat: float
    p_hat: float = Field(ge=0, le=1)
    flip_rate: float = Field(ge=0, le=0.5)
    seed: SeedPath
    scope: str = "conditional_given_data"


class RecordError(BaseModel):
    dimension_id: str
    detail: str


class DatasetInstability(BaseModel):
    c0: float
    reps: int
    summaries: List[BootstrapSummary]
    errors: List[RecordError] = []
    median_flip: Optional[float] = None
    share_above_20: Optional[float] = None
    share_above_30: Optional[float] = None
    percentile_90: Optional[float] = None


class InstabilityBin(BaseModel):
    distance_lo: float
    distance_hi: float
    mean_flip: float
    q25_flip: float
    q75_flip: float
    count: int


class InstabilityCurve(BaseModel):
    c0: float
    binning: str = "quantile"
    max_distance: float
    bins: List[InstabilityBin]


class SyntheticStratum(BaseModel):
    """One block of synthetic dimensions sharing a true capability."""

    true_cpk: float = Field(gt=0)
    n: int = Field(ge=2)
    count: int = Field(ge=1)
    family: ProcessFamily = ProcessFamily.NORMAL
    calibration_mode: CalibrationMode = CalibrationMode.ONE_SIDED


class DimensionEstimate(BaseModel):
    """Point estimate, gate decisions and normality screen of one dimension."""

    dimension_id: str
    n: int
    mean: float
    sd: float
    cpu: float
    cpl: float
    cpk: float
    active_side: ActiveSide
    accept: bool
    accept_margin: bool
    margin_threshold: float
    normality: Optional[NormalityResult] = None


class StratifiedConcentration(BaseModel):
    all_dimensions: ConcentrationTable
    normal_subset: Optional[ConcentrationTable] = None
    tested: int
    passed: int
