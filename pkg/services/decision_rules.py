"""Approval rules: deterministic threshold, margin, lower confidence bound and probability.

The boundary case statistic == cutoff accepts; comparisons are exact.
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy import special

from models.capability.capability_models import CapabilityEstimate, SampleSummary, SpecLimits
from models.decision.decision_models import (
    Decision,
    DecisionRuleSpec,
    MarginCalibration,
    ProbabilityMethod,
    RuleKind,
)
from models.process.process_models import ProcessModel, SeedPath
from services.asymptotics import calibrate_margin, sigma_c_closed_form
from services.capability_core import batch_cpk
from services.errors import InvalidInputError, TiedSidesError
from services.rng_distributions import normal_cdf, normal_quantile, sample_matrix

logger = logging.getLogger(__name__)

MIN_INNER_REPS = 100


def _plug_in_sigma_c(cpk: float) -> float:
    return sigma_c_closed_form(abs(cpk))


def _require_untied(est: CapabilityEstimate) -> None:
    if est.tied:
        raise TiedSidesError(
            f"cpu={est.cpu!r} and cpl={est.cpl!r} are tied; the delta-method dispersion does not apply"
        )


def margin_calibration(rule: DecisionRuleSpec, n: int) -> MarginCalibration:
    sigma_c = rule.sigma_c if rule.sigma_c is not None else sigma_c_closed_form(rule.c0)
    return calibrate_margin(rule.c0, n, sigma_c, rule.alpha)


def decide_deterministic(est: CapabilityEstimate, c0: float) -> Decision:
    return Decision(accept=est.cpk >= c0, statistic=est.cpk, cutoff=c0)


def decide_margin(est: CapabilityEstimate, cal: MarginCalibration) -> Decision:
    return Decision(
        accept=est.cpk >= cal.adjusted_threshold,
        statistic=est.cpk,
        cutoff=cal.adjusted_threshold,
    )


def lower_confidence_bound(cpk: float, n: int, alpha: float) -> float:
    """Normal-approximation LCB: C_hat - z_(1-alpha) * sigma_c(C_hat) / sqrt(n)."""
    return cpk - normal_quantile(1.0 - alpha) * _plug_in_sigma_c(cpk) / math.sqrt(n)


def decide_lcb(summary: SampleSummary, est: CapabilityEstimate, c0: float, alpha: float) -> Decision:
    _require_untied(est)
    if not 0.0 < alpha < 1.0:
        raise InvalidInputError(f"alpha must lie in (0, 1), got {alpha}")
    statistic = lower_confidence_bound(est.cpk, summary.n, alpha)
    return Decision(accept=statistic >= c0, statistic=statistic, cutoff=c0)


def _plug_in_spec(summary: SampleSummary, est: CapabilityEstimate) -> SpecLimits:
    # Rebuild limits consistent with (mean, sd, cpu, cpl); C_pk is affine invariant.
    usl = summary.mean + 3.0 * summary.sd * est.cpu if math.isfinite(est.cpu) else math.inf
    lsl = summary.mean - 3.0 * summary.sd * est.cpl if math.isfinite(est.cpl) else -math.inf
    return SpecLimits(lsl=lsl, usl=usl)


def nested_acceptance_probability(
    mean: float,
    sd: float,
    n: int,
    spec: SpecLimits,
    c0: float,
    inner_reps: int,
    seed: SeedPath,
) -> float:
    """Monte Carlo Pr(C_hat >= c0) under the plug-in normal model N(mean, sd)."""
    if inner_reps < MIN_INNER_REPS:
        raise InvalidInputError(f"nested Monte Carlo requires inner_reps >= {MIN_INNER_REPS}")
    model = ProcessModel.normal(mu=mean, sigma=sd)
    cpk, degenerate = batch_cpk(sample_matrix(model, inner_reps, n, seed), spec)
    valid = ~degenerate
    if not valid.any():
        raise InvalidInputError("every nested replicate had zero variance")
    return float(np.mean(cpk[valid] >= c0))


def decide_probability(
    summary: SampleSummary,
    est: CapabilityEstimate,
    rule: DecisionRuleSpec,
    seed: Optional[SeedPath] = None,
) -> Decision:
    if rule.kind != RuleKind.PROBABILITY:
        raise InvalidInputError(f"decide_probability needs a probability rule, got {rule.kind.value}")
    if rule.prob_method == ProbabilityMethod.PLUG_IN_ASYMPTOTIC:
        _require_untied(est)
        statistic = normal_cdf(math.sqrt(summary.n) * (est.cpk - rule.c0) / _plug_in_sigma_c(est.cpk))
    else:
        if seed is None:
            raise InvalidInputError("nested Monte Carlo needs a seed")
        statistic = nested_acceptance_probability(
            summary.mean,
            summary.sd,
            summary.n,
            _plug_in_spec(summary, est),
            rule.c0,
            rule.inner_reps,
            seed,
        )
    return Decision(accept=statistic >= rule.p_min, statistic=statistic, cutoff=rule.p_min)


def decide(
    rule: DecisionRuleSpec,
    summary: SampleSummary,
    est: CapabilityEstimate,
    seed: Optional[SeedPath] = None,
) -> Decision:
    if rule.kind == RuleKind.DETERMINISTIC:
        return decide_deterministic(est, rule.c0)
    if rule.kind == RuleKind.MARGIN:
        return decide_margin(est, margin_calibration(rule, summary.n))
    if rule.kind == RuleKind.LCB:
        return decide_lcb(summary, est, rule.c0, rule.alpha)
    return decide_probability(summary, est, rule, seed)


def accept_batch(
    rule: DecisionRuleSpec,
    cpk: np.ndarray,
    mean: np.ndarray,
    sd: np.ndarray,
    n: int,
    spec: SpecLimits,
    seed: Optional[SeedPath] = None,
) -> np.ndarray:
    """Vectorised ``decide`` over replicate estimates sharing one sample size."""
    if rule.kind == RuleKind.DETERMINISTIC:
        return cpk >= rule.c0
    if rule.kind == RuleKind.MARGIN:
        return cpk >= margin_calibration(rule, n).adjusted_threshold
    sigma = np.sqrt(1.0 / 9.0 + cpk**2 / 2.0)
    if rule.kind == RuleKind.LCB:
        lcb = cpk - normal_quantile(1.0 - rule.alpha) * sigma / math.sqrt(n)
        return lcb >= rule.c0
    if rule.prob_method == ProbabilityMethod.PLUG_IN_ASYMPTOTIC:
        return special.ndtr(math.sqrt(n) * (cpk - rule.c0) / sigma) >= rule.p_min

    if seed is None:
        raise InvalidInputError("nested Monte Carlo needs a seed")
    accepted = np.empty(cpk.shape, dtype=bool)
    for i in range(cpk.size):
        p = nested_acceptance_probability(
            float(mean[i]), float(sd[i]), n, spec, rule.c0, rule.inner_reps, seed.child(i)
        )
        accepted[i] = p >= rule.p_min
    return accepted
