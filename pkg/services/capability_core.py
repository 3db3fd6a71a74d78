"""Capability index definitions, plug-in estimation and model calibration."""

import logging
import math
from typing import Sequence, Tuple

import numpy as np
from scipy import special

from models.capability.capability_models import (
    ActiveSide,
    CapabilityEstimate,
    QuantileTriple,
    SampleSummary,
    SpecLimits,
)
from models.process.process_models import ProcessFamily, ProcessModel
from models.simulation.simulation_models import CalibrationMode, EstimatorKind
from services.errors import CalibrationError, InvalidInputError, ZeroVarianceError

logger = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-9

# Percentile levels of the percentile-based index: Phi(-3) and Phi(3),
# conventionally rounded to 0.135 % and 99.865 %.
LOWER_TAIL = float(special.ndtr(-3.0))
UPPER_TAIL = float(special.ndtr(3.0))
QUANTILE_LEVELS = (LOWER_TAIL, 0.5, UPPER_TAIL)
QUANTILE_METHOD = "median_unbiased"

MIN_CNPK_N = 20
# Below this size the 0.135th percentile lies outside the observed order statistics.
EXTRAPOLATION_N = math.ceil(1.0 / 0.00135)

# Ratio of the inactive to the active side for one-sided percentile calibration.
ONE_SIDED_LOWER_FACTOR = 3.0

DEFAULT_LOG_SIGMA = 0.25


def active_side(cpu: float, cpl: float) -> ActiveSide:
    if abs(cpu - cpl) <= TIE_TOLERANCE:
        return ActiveSide.TIED
    return ActiveSide.UPPER if cpu < cpl else ActiveSide.LOWER


def cpk_point(mu: float, sigma: float, spec: SpecLimits) -> CapabilityEstimate:
    if not sigma > 0:
        raise InvalidInputError(f"sigma must be > 0, got {sigma}")
    cpu = (spec.usl - mu) / (3.0 * sigma) if math.isfinite(spec.usl) else math.inf
    cpl = (mu - spec.lsl) / (3.0 * sigma) if math.isfinite(spec.lsl) else math.inf
    return CapabilityEstimate(cpu=cpu, cpl=cpl, cpk=min(cpu, cpl), active_side=active_side(cpu, cpl))


def summarize(measurements: Sequence[float]) -> SampleSummary:
    x = np.asarray(measurements, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise InvalidInputError(f"at least 2 measurements are required, got {x.size}")
    if np.ptp(x) == 0:
        raise ZeroVarianceError("all measurements are identical; sample variance is zero")
    return SampleSummary(n=int(x.size), mean=float(x.mean()), sd=float(x.std(ddof=1)))


def estimate_cpk(measurements: Sequence[float], spec: SpecLimits) -> Tuple[SampleSummary, CapabilityEstimate]:
    """Plug-in C_pk using the sample mean and the overall (n-1) standard deviation."""
    summary = summarize(measurements)
    return summary, cpk_point(summary.mean, summary.sd, spec)


def cnpk_point(q: QuantileTriple, spec: SpecLimits) -> float:
    if not spec.bilateral:
        raise InvalidInputError("the percentile-based index requires both specification limits")
    upper_spread = q.p99865 - q.p50
    lower_spread = q.p50 - q.p00135
    if upper_spread <= 0 or lower_spread <= 0:
        raise InvalidInputError("degenerate quantile spread")
    return min((spec.usl - q.p50) / upper_spread, (q.p50 - spec.lsl) / lower_spread)


def empirical_quantiles(measurements: Sequence[float]) -> np.ndarray:
    x = np.asarray(measurements, dtype=float)
    return np.quantile(x, QUANTILE_LEVELS, method=QUANTILE_METHOD)


def estimate_cnpk(measurements: Sequence[float], spec: SpecLimits) -> float:
    x = np.asarray(measurements, dtype=float)
    if x.size < MIN_CNPK_N:
        raise InvalidInputError(f"the percentile-based estimator needs n >= {MIN_CNPK_N}, got {x.size}")
    if x.size < EXTRAPOLATION_N:
        logger.warning(
            "n=%d < %d: tail percentile estimates are extrapolated from the sample extremes",
            x.size,
            EXTRAPOLATION_N,
        )
    lo, mid, hi = (float(v) for v in empirical_quantiles(x))
    if not lo < mid < hi:
        raise ZeroVarianceError("degenerate quantile spread")
    return cnpk_point(QuantileTriple(p00135=lo, p50=mid, p99865=hi), spec)


def exact_quantiles(model: ProcessModel) -> QuantileTriple:
    if model.family == ProcessFamily.NORMAL:
        return QuantileTriple(
            p00135=model.mu - 3.0 * model.sigma,
            p50=model.mu,
            p99865=model.mu + 3.0 * model.sigma,
        )
    return QuantileTriple(
        p00135=model.shift + math.exp(model.log_mu - 3.0 * model.log_sigma),
        p50=model.shift + math.exp(model.log_mu),
        p99865=model.shift + math.exp(model.log_mu + 3.0 * model.log_sigma),
    )


def true_capability(model: ProcessModel, spec: SpecLimits) -> float:
    """Population index of a model: C_pk for normal, C_Npk for lognormal."""
    if model.family == ProcessFamily.NORMAL:
        return cpk_point(model.mu, model.sigma, spec).cpk
    return cnpk_point(exact_quantiles(model), spec)


def calibrate_model(
    target_cpk: float,
    mode: CalibrationMode = CalibrationMode.ONE_SIDED,
    family: ProcessFamily = ProcessFamily.NORMAL,
    log_sigma: float = DEFAULT_LOG_SIGMA,
) -> Tuple[ProcessModel, SpecLimits]:
    """Build a (model, spec) pair whose true capability equals ``target_cpk``.

    one_sided leaves a uniquely active upper side; centered makes both sides
    attain the target.
    """
    if not (math.isfinite(target_cpk) and target_cpk > 0):
        raise InvalidInputError(f"target capability must be finite and > 0, got {target_cpk}")

    mode = CalibrationMode(mode)
    family = ProcessFamily(family)
    if family == ProcessFamily.NORMAL:
        model = ProcessModel.normal(mu=0.0, sigma=1.0)
        half = 3.0 * target_cpk
        lsl = -math.inf if mode == CalibrationMode.ONE_SIDED else -half
        usl = half
    else:
        model = ProcessModel.shifted_lognormal(shift=0.0, log_mu=0.0, log_sigma=log_sigma)
        q = exact_quantiles(model)
        usl = q.p50 + target_cpk * (q.p99865 - q.p50)
        lower_ratio = target_cpk * (ONE_SIDED_LOWER_FACTOR if mode == CalibrationMode.ONE_SIDED else 1.0)
        lsl = q.p50 - lower_ratio * (q.p50 - q.p00135)

    if not (math.isfinite(usl) and usl > lsl):
        raise CalibrationError(f"cannot calibrate a {family.value} model to capability {target_cpk}")
    spec = SpecLimits(lsl=lsl, usl=usl)
    achieved = true_capability(model, spec)
    if abs(achieved - target_cpk) > 1e-12 * max(1.0, target_cpk):
        raise CalibrationError(f"calibration reached {achieved!r} instead of {target_cpk!r}")
    return model, spec


def batch_summary(samples: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row-wise mean, sd and zero-variance mask of a (reps, n) matrix."""
    mean = samples.mean(axis=1)
    sd = samples.std(axis=1, ddof=1)
    degenerate = np.ptp(samples, axis=1) == 0
    return mean, sd, degenerate


def cpk_from_moments(mean: np.ndarray, sd: np.ndarray, spec: SpecLimits) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        cpu = (spec.usl - mean) / (3.0 * sd) if math.isfinite(spec.usl) else np.full_like(mean, np.inf)
        cpl = (mean - spec.lsl) / (3.0 * sd) if math.isfinite(spec.lsl) else np.full_like(mean, np.inf)
    return np.minimum(cpu, cpl)


def batch_cpk(samples: np.ndarray, spec: SpecLimits) -> Tuple[np.ndarray, np.ndarray]:
    mean, sd, degenerate = batch_summary(samples)
    return cpk_from_moments(mean, sd, spec), degenerate


def batch_cnpk(samples: np.ndarray, spec: SpecLimits) -> Tuple[np.ndarray, np.ndarray]:
    if not spec.bilateral:
        raise InvalidInputError("the percentile-based index requires both specification limits")
    q = np.quantile(samples, QUANTILE_LEVELS, axis=1, method=QUANTILE_METHOD)
    upper_spread = q[2] - q[1]
    lower_spread = q[1] - q[0]
    degenerate = (upper_spread <= 0) | (lower_spread <= 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.minimum((spec.usl - q[1]) / upper_spread, (q[1] - spec.lsl) / lower_spread)
    return values, degenerate


def batch_estimate(samples: np.ndarray, spec: SpecLimits, estimator: EstimatorKind) -> Tuple[np.ndarray, np.ndarray]:
    """Row-wise capability estimates plus a mask of rows with no valid estimate."""
    if EstimatorKind(estimator) == EstimatorKind.CNPK:
        return batch_cnpk(samples, spec)
    return batch_cpk(samples, spec)
