"""Monte Carlo engine for misclassification risk near the approval threshold.

Every work unit (a grid cell, a collapse point, a replicate block) draws from
a seed derived only from the base seed and its own coordinates, so results do
not depend on the number of threads or the order of execution.
"""

import logging
import math
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from models.capability.capability_models import SpecLimits
from models.decision.decision_models import DecisionRuleSpec, ProbabilityMethod, RuleKind
from models.process.process_models import ProcessFamily, ProcessModel, SeedPath
from models.simulation.simulation_models import (
    AcceptanceSurface,
    CalibrationMode,
    CollapsePoint,
    EstimatorKind,
    MisclassEstimate,
    MisclassType,
    RiskSurface,
    RuleBoundary,
    SamplingDistribution,
    SamplingHistogram,
    ScalingCollapse,
    SigmaCSource,
    SimulationConfig,
    SkippedCollapseCell,
)
from services.asymptotics import sigma_c_closed_form
from services.capability_core import MIN_CNPK_N, batch_estimate, batch_summary, calibrate_model
from services.decision_rules import accept_batch
from services.errors import CapgateError, ComputationError, InvalidInputError
from services.rng_distributions import normal_cdf, sample_matrix
from services.worker_pool import map_ordered

logger = logging.getLogger(__name__)

BLOCK_SIZE = 10_000
MAX_ZERO_VARIANCE_RETRIES = 100
MIN_REPS = 1000
MIN_DISTRIBUTION_REPS = 10_000
MIN_N = 4

DEFAULT_POINT_REPS = 100_000
DEFAULT_CELL_REPS = 20_000


class Replicates(NamedTuple):
    values: np.ndarray
    mean: np.ndarray
    sd: np.ndarray
    retries: int


def calibrated_model(cpk_true: float, config: SimulationConfig) -> Tuple[ProcessModel, SpecLimits]:
    model, spec = calibrate_model(cpk_true, config.calibration_mode, config.family, config.log_sigma)
    if config.estimator == EstimatorKind.CNPK and not spec.bilateral:
        raise InvalidInputError(
            "the percentile-based estimator needs bilateral limits; use centered mode or the lognormal family"
        )
    return model, spec


def simulate_estimates(
    model: ProcessModel,
    spec: SpecLimits,
    n: int,
    reps: int,
    estimator: EstimatorKind,
    seed: SeedPath,
) -> Replicates:
    """Draw ``reps`` samples of size n in fixed blocks and estimate each one.

    Zero-variance samples are redrawn from a derived sub-seed, at most
    MAX_ZERO_VARIANCE_RETRIES times per sample.
    """
    values, means, sds = [], [], []
    retries = 0
    for block, start in enumerate(range(0, reps, BLOCK_SIZE)):
        size = min(BLOCK_SIZE, reps - start)
        samples = sample_matrix(model, size, n, seed.child(block))
        est, degenerate = batch_estimate(samples, spec, estimator)
        mean, sd, _ = batch_summary(samples)
        for row in np.flatnonzero(degenerate):
            for attempt in range(MAX_ZERO_VARIANCE_RETRIES):
                retries += 1
                redraw = sample_matrix(model, 1, n, seed.child(block, "retry", int(row), attempt))
                row_est, row_degenerate = batch_estimate(redraw, spec, estimator)
                if not row_degenerate[0]:
                    row_mean, row_sd, _ = batch_summary(redraw)
                    est[row], mean[row], sd[row] = row_est[0], row_mean[0], row_sd[0]
                    break
            else:
                raise ComputationError(
                    f"sample {start + row} stayed degenerate after {MAX_ZERO_VARIANCE_RETRIES} redraws (n={n})"
                )
        values.append(est)
        means.append(mean)
        sds.append(sd)
    if retries:
        logger.warning("%d zero-variance samples redrawn (n=%d)", retries, n)
    return Replicates(np.concatenate(values), np.concatenate(means), np.concatenate(sds), retries)


def _check_estimator(config: SimulationConfig, n: int) -> None:
    if config.estimator == EstimatorKind.CNPK and n < MIN_CNPK_N:
        raise InvalidInputError(f"the percentile-based estimator needs n >= {MIN_CNPK_N}, got {n}")


def warn_estimator_mismatch(config: SimulationConfig) -> None:
    if config.family == ProcessFamily.SHIFTED_LOGNORMAL and config.estimator == EstimatorKind.CPK:
        logger.warning("lognormal truth is calibrated on the percentile index while C_pk is estimated")


def _check_reps(reps: int, minimum: int) -> None:
    if reps < minimum:
        raise InvalidInputError(f"reps must be at least {minimum}, got {reps}")


def _check_n(n: int) -> None:
    if n < MIN_N:
        raise InvalidInputError(f"n must be at least {MIN_N}, got {n}")


def _check_grid(name: str, grid: Sequence) -> None:
    if len(grid) == 0:
        raise InvalidInputError(f"{name} must not be empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidInputError(f"{name} must be strictly increasing")


def estimate_misclass(
    cpk_true: float,
    n: int,
    c0: float,
    reps: int,
    config: SimulationConfig,
    seed: SeedPath,
) -> MisclassEstimate:
    """Monte Carlo acceptance and misclassification at one (cpk_true, n).

    Below c0 acceptance is a false accept (type1); at or above c0 rejection
    is a false reject (type2).
    """
    _check_reps(reps, MIN_REPS)
    _check_n(n)
    _check_estimator(config, n)
    model, spec = calibrated_model(cpk_true, config)
    reps_out = simulate_estimates(model, spec, n, reps, config.estimator, seed)
    accepted = int(np.count_nonzero(reps_out.values >= c0))
    p_accept = accepted / reps
    if cpk_true < c0:
        misclass_type, misclass = MisclassType.TYPE1, p_accept
    else:
        misclass_type, misclass = MisclassType.TYPE2, 1.0 - p_accept
    return MisclassEstimate(
        cpk_true=cpk_true,
        n=n,
        c0=c0,
        reps=reps,
        accepted=accepted,
        p_accept=p_accept,
        misclass=misclass,
        misclass_type=misclass_type,
        mc_se=math.sqrt(misclass * (1.0 - misclass) / reps),
        zero_variance_retries=reps_out.retries,
    )


def _annotate(exc: CapgateError, location: str) -> CapgateError:
    exc.detail = f"{location}: {exc.detail}"
    return exc


def risk_surface(
    cpk_grid: Sequence[float],
    n_grid: Sequence[int],
    c0: float,
    reps: int,
    config: SimulationConfig,
    base_seed: SeedPath,
    threads: int = 1,
) -> RiskSurface:
    _check_grid("cpk_grid", cpk_grid)
    _check_grid("n_grid", n_grid)
    warn_estimator_mismatch(config)
    cells = [(i, j) for i in range(len(cpk_grid)) for j in range(len(n_grid))]

    def run_cell(cell: Tuple[int, int]) -> MisclassEstimate:
        i, j = cell
        try:
            return estimate_misclass(cpk_grid[i], n_grid[j], c0, reps, config, base_seed.child(i, j))
        except CapgateError as exc:
            raise _annotate(exc, f"cell (row={i}, col={j}, cpk_true={cpk_grid[i]}, n={n_grid[j]})")

    results = map_ordered(run_cell, cells, threads, label="surface cell")
    width = len(n_grid)
    rows = [results[i * width:(i + 1) * width] for i in range(len(cpk_grid))]
    return RiskSurface(
        c0=c0,
        cpk_grid=list(cpk_grid),
        n_grid=list(n_grid),
        cells=rows,
        config=config,
        reps=reps,
        base_seed=base_seed,
    )


def sigma_c_empirical(
    cpk_true: float,
    n: int,
    config: SimulationConfig,
    reps: int,
    seed: SeedPath,
) -> float:
    """Standard deviation of sqrt(n) * (C_hat - cpk_true) across replicates."""
    _check_reps(reps, MIN_DISTRIBUTION_REPS)
    _check_n(n)
    _check_estimator(config, n)
    model, spec = calibrated_model(cpk_true, config)
    values = simulate_estimates(model, spec, n, reps, config.estimator, seed).values
    return float(np.std(math.sqrt(n) * (values - cpk_true), ddof=1))


def scaling_collapse(
    z_grid: Sequence[float],
    n_list: Sequence[int],
    c0: float,
    reps: int,
    sigma_c_source: SigmaCSource,
    base_seed: SeedPath,
    config: SimulationConfig = SimulationConfig(),
    threads: int = 1,
) -> ScalingCollapse:
    """Acceptance probability on the scaled axis z = sqrt(n) (C_true - c0) / sigma_c."""
    _check_reps(reps, MIN_DISTRIBUTION_REPS)
    warn_estimator_mismatch(config)
    if any(not math.isfinite(z) for z in z_grid):
        raise InvalidInputError("z values must be finite")
    sigma_c_source = SigmaCSource(sigma_c_source)
    if sigma_c_source == SigmaCSource.CLOSED_FORM and config.calibration_mode == CalibrationMode.CENTERED:
        logger.warning("closed-form sigma_c assumes a uniquely active side; centered mode violates it")

    sigmas = []
    for j, n in enumerate(n_list):
        if sigma_c_source == SigmaCSource.CLOSED_FORM:
            sigmas.append(sigma_c_closed_form(c0))
        else:
            sigmas.append(sigma_c_empirical(c0, n, config, reps, base_seed.child("sigma_c", j)))

    cells, skipped = [], []
    for j, n in enumerate(n_list):
        for k, z in enumerate(z_grid):
            cpk_true = c0 + z * sigmas[j] / math.sqrt(n)
            if cpk_true <= 0:
                logger.warning("skipping z=%g at n=%d: cpk_true=%g is not positive", z, n, cpk_true)
                skipped.append(SkippedCollapseCell(z=z, n=n, cpk_true=cpk_true, reason="cpk_true <= 0"))
                continue
            cells.append((j, k, cpk_true))

    def run_point(cell: Tuple[int, int, float]) -> CollapsePoint:
        j, k, cpk_true = cell
        n, z = n_list[j], z_grid[k]
        try:
            est = estimate_misclass(cpk_true, n, c0, reps, config, base_seed.child(j, k))
        except CapgateError as exc:
            raise _annotate(exc, f"collapse point (z={z}, n={n})")
        phi_z = normal_cdf(z)
        return CollapsePoint(
            z=z,
            n=n,
            cpk_true=cpk_true,
            sigma_c=sigmas[j],
            p_mc=est.p_accept,
            phi_z=phi_z,
            residual=est.p_accept - phi_z,
            mc_se=math.sqrt(est.p_accept * (1.0 - est.p_accept) / reps),
        )

    points = map_ordered(run_point, cells, threads, label="collapse point")
    return ScalingCollapse(c0=c0, reps=reps, sigma_c_source=sigma_c_source, points=points, skipped=skipped)


def freedman_diaconis_width(values: np.ndarray) -> float:
    if np.subtract(*np.percentile(values, [75, 25])) == 0:
        raise ComputationError("cannot size histogram bins: interquartile range is zero")
    edges = np.histogram_bin_edges(values, bins="fd")
    return float(edges[1] - edges[0])


def sampling_distribution(
    cpk_true: float,
    n_list: Sequence[int],
    c0: float,
    reps: int,
    base_seed: SeedPath,
    config: SimulationConfig = SimulationConfig(),
) -> SamplingDistribution:
    """Histograms of C_hat for several n on shared bins, plus the mass below c0."""
    _check_reps(reps, MIN_DISTRIBUTION_REPS)
    warn_estimator_mismatch(config)
    if len(n_list) == 0:
        raise InvalidInputError("n_list must not be empty")
    model, spec = calibrated_model(cpk_true, config)
    draws = []
    for j, n in enumerate(n_list):
        _check_n(n)
        _check_estimator(config, n)
        draws.append(simulate_estimates(model, spec, n, reps, config.estimator, base_seed.child(j)).values)

    # Bin width comes from the first n so overlaid histograms share bins.
    width = freedman_diaconis_width(draws[0])
    lo = min(float(v.min()) for v in draws)
    hi = max(float(v.max()) for v in draws)
    n_bins = max(1, math.ceil((hi - lo) / width))
    edges = lo + width * np.arange(n_bins + 1)
    edges[-1] = max(edges[-1], hi)

    histograms = []
    for n, values in zip(n_list, draws):
        counts, _ = np.histogram(values, bins=edges)
        histograms.append(
            SamplingHistogram(
                n=n,
                counts=counts.tolist(),
                mass=(counts / values.size).tolist(),
                tail_below_c0=float(np.mean(values < c0)),
                mean=float(values.mean()),
                sd=float(values.std(ddof=1)),
            )
        )
    return SamplingDistribution(cpk_true=cpk_true, c0=c0, reps=reps, bin_edges=edges.tolist(), histograms=histograms)


def rule_acceptance_surface(
    rule: DecisionRuleSpec,
    cpk_grid: Sequence[float],
    n_grid: Sequence[int],
    reps: int,
    config: SimulationConfig,
    base_seed: SeedPath,
    threads: int = 1,
) -> AcceptanceSurface:
    """Fraction of replicates each grid cell's rule accepts.

    Cells share seeds with ``risk_surface``, so the deterministic rule
    reproduces its acceptance probabilities exactly.
    """
    _check_grid("cpk_grid", cpk_grid)
    _check_grid("n_grid", n_grid)
    warn_estimator_mismatch(config)
    _check_reps(reps, MIN_REPS)
    if rule.kind in (RuleKind.LCB, RuleKind.PROBABILITY) and config.estimator != EstimatorKind.CPK:
        raise InvalidInputError(f"the {rule.kind.value} rule is defined for the C_pk estimator only")
    nested = rule.kind == RuleKind.PROBABILITY and rule.prob_method == ProbabilityMethod.NESTED_MONTE_CARLO
    if nested:
        logger.warning(
            "nested Monte Carlo: %d inner samples per replicate, %d replicates per cell",
            rule.inner_reps,
            reps,
        )

    cells = [(i, j) for i in range(len(cpk_grid)) for j in range(len(n_grid))]

    def run_cell(cell: Tuple[int, int]) -> float:
        i, j = cell
        cpk_true, n = cpk_grid[i], n_grid[j]
        try:
            _check_n(n)
            _check_estimator(config, n)
            model, spec = calibrated_model(cpk_true, config)
            seed = base_seed.child(i, j)
            draws = simulate_estimates(model, spec, n, reps, config.estimator, seed)
            accepted = accept_batch(rule, draws.values, draws.mean, draws.sd, n, spec, seed.child("nested"))
        except CapgateError as exc:
            raise _annotate(exc, f"cell (row={i}, col={j}, cpk_true={cpk_true}, n={n})")
        return float(np.mean(accepted))

    results = map_ordered(run_cell, cells, threads, label="rule cell")
    width = len(n_grid)
    return AcceptanceSurface(
        rule=rule,
        cpk_grid=list(cpk_grid),
        n_grid=list(n_grid),
        acceptance=[results[i * width:(i + 1) * width] for i in range(len(cpk_grid))],
        reps=reps,
        config=config,
        base_seed=base_seed,
    )


def acceptance_boundary(surface: AcceptanceSurface, level: float = 0.5) -> List[RuleBoundary]:
    """Per-n cpk_true where acceptance first rises through ``level`` (linear interpolation)."""
    boundaries = []
    grid = surface.cpk_grid
    for j, n in enumerate(surface.n_grid):
        column = [row[j] for row in surface.acceptance]
        crossing = None
        for k in range(1, len(grid)):
            lo, hi = column[k - 1], column[k]
            if lo < level <= hi:
                crossing = grid[k - 1] + (level - lo) / (hi - lo) * (grid[k] - grid[k - 1])
                break
        boundaries.append(RuleBoundary(n=n, level=level, cpk_true=crossing))
    return boundaries

