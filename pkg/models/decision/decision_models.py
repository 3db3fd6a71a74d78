from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class RuleKind(str, Enum):
    DETERMINISTIC = "deterministic"
    MARGIN = "margin"
    LCB = "lcb"
    PROBABILITY = "probability"


class ProbabilityMethod(str, Enum):
    PLUG_IN_ASYMPTOTIC = "plug_in_asymptotic"
    NESTED_MONTE_CARLO = "nested_monte_carlo"


class DecisionRuleSpec(BaseModel):
    """Approval rule configuration.

    alpha is used by the margin and lcb rules, p_min by the probability rule.
    sigma_c fixes the dispersion used to calibrate the margin rule; when left
    unset the closed form at c0 is used.
    """

    model_config = ConfigDict(frozen=True)

    kind: RuleKind
    c0: float = Field(gt=0)
    alpha: float = Field(default=0.05, gt=0, lt=1)
    p_min: float = Field(default=0.95, gt=0, lt=1)
    prob_method: ProbabilityMethod = ProbabilityMethod.PLUG_IN_ASYMPTOTIC
    inner_reps: int = Field(default=2000, ge=1)
    sigma_c: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def validate_inner_reps(self):
        if (
            self.kind == RuleKind.PROBABILITY
            and self.prob_method == ProbabilityMethod.NESTED_MONTE_CARLO
            and self.inner_reps < 100
        ):
            raise ValueError("nested Monte Carlo requires inner_reps >= 100")
        return self


class Decision(BaseModel):
    model_config = ConfigDict(frozen=True)

    accept: bool
    statistic: float
    cutoff: float

    @model_validator(mode="after")
    def validate_accept(self):
        if self.accept != (self.statistic >= self.cutoff):
            raise ValueError("accept must equal (statistic >= cutoff)")
        return self


class InstabilityBand(BaseModel):
    model_config = ConfigDict(frozen=True)

    c0: float
    n: int
    sigma_c: float
    epsilon: float = Field(gt=0, lt=0.5)
    lower: float
    upper: float
    width: float

    @property
    def half_width(self) -> float:
        return self.width / 2.0


class MarginCalibration(BaseModel):
    model_config = ConfigDict(frozen=True)

    c0: float
    alpha: float = Field(gt=0, lt=1)
    sigma_c: float = Field(gt=0)
    n: int = Field(ge=1)
    kappa: float
    margin: float
    adjusted_threshold: float
