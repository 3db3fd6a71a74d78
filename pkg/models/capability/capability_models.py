import math
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ActiveSide(str, Enum):
    UPPER = "upper"
    LOWER = "lower"
    TIED = "tied"


class SpecLimits(BaseModel):
    """Specification interval; an infinite limit makes it unilateral."""

    model_config = ConfigDict(frozen=True)

    lsl: float = -math.inf
    usl: float = math.inf

    @model_validator(mode="after")
    def validate_limits(self):
        if math.isnan(self.lsl) or math.isnan(self.usl):
            raise ValueError("specification limits must not be NaN")
        if self.lsl == math.inf or self.usl == -math.inf:
            raise ValueError("lsl cannot be +inf and usl cannot be -inf")
        if not self.lsl < self.usl:
            raise ValueError(f"lsl ({self.lsl}) must be below usl ({self.usl})")
        if math.isinf(self.lsl) and math.isinf(self.usl):
            raise ValueError("at least one specification limit must be finite")
        return self

    @property
    def bilateral(self) -> bool:
        return math.isfinite(self.lsl) and math.isfinite(self.usl)

    def shifted(self, offset: float, scale: float = 1.0) -> "SpecLimits":
        return SpecLimits(lsl=self.lsl * scale + offset, usl=self.usl * scale + offset)


class SampleSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=2)
    mean: float
    sd: float = Field(ge=0)


class CapabilityEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    cpu: float
    cpl: float
    cpk: float
    active_side: ActiveSide

    @property
    def tied(self) -> bool:
        return self.active_side == ActiveSide.TIED


class QuantileTriple(BaseModel):
    """Lower tail, median and upper tail percentiles (P0.135, P50, P99.865)."""

    model_config = ConfigDict(frozen=True)

    p00135: float
    p50: float
    p99865: float

    @model_validator(mode="after")
    def validate_ordering(self):
        if not (self.p00135 < self.p50 < self.p99865):
            raise ValueError("quantiles must satisfy p00135 < p50 < p99865")
        return self
