"""Nonparametric bootstrap of approval decisions on measured datasets.

Flip rates describe how often resampling the observed data reverses the gate
decision; they are conditional on the data, not population misclassification.
"""

import logging
from typing import List, Sequence

import numpy as np

from models.capability.capability_models import SpecLimits
from models.dataset.dataset_models import (
    BootstrapSummary,
    DatasetInstability,
    DimensionRecord,
    InstabilityBin,
    InstabilityCurve,
    RecordError,
)
from models.process.process_models import SeedPath
from services.capability_core import batch_cpk, estimate_cpk
from services.errors import CapgateError, InvalidInputError, ZeroVarianceError
from services.worker_pool import map_ordered

logger = logging.getLogger(__name__)

DEFAULT_BOOTSTRAP_REPS = 5000
MIN_BOOTSTRAP_REPS = 1000
BLOCK_SIZE = 10_000
FLIP_THRESHOLDS = (0.20, 0.30)


def flip_rate(p_hat: float) -> float:
    return min(p_hat, 1.0 - p_hat)


def _resample(x: np.ndarray, rows: int, seed: SeedPath) -> np.ndarray:
    idx = seed.generator().integers(0, x.size, size=(rows, x.size))
    return x[idx]


def _bootstrap_cpk(x: np.ndarray, spec: SpecLimits, reps: int, seed: SeedPath):
    """C_pk of ``reps`` resamples; degenerate resamples are redrawn once, then dropped."""
    values = []
    skipped = 0
    for block, start in enumerate(range(0, reps, BLOCK_SIZE)):
        size = min(BLOCK_SIZE, reps - start)
        cpk, degenerate = batch_cpk(_resample(x, size, seed.child(block)), spec)
        for row in np.flatnonzero(degenerate):
            redo, redo_degenerate = batch_cpk(_resample(x, 1, seed.child(block, "retry", int(row))), spec)
            if redo_degenerate[0]:
                skipped += 1
            else:
                cpk[row] = redo[0]
                degenerate[row] = False
        values.append(cpk[~degenerate])
    return np.concatenate(values), skipped


def bootstrap_dimension(record: DimensionRecord, c0: float, reps: int, seed: SeedPath) -> BootstrapSummary:
    if record.n < 2:
        raise InvalidInputError(f"dimension {record.dimension_id!r} needs at least 2 measurements, got {record.n}")
    if reps < MIN_BOOTSTRAP_REPS:
        raise InvalidInputError(f"bootstrap reps must be at least {MIN_BOOTSTRAP_REPS}, got {reps}")

    x = np.asarray(record.measurements, dtype=float)
    _, est = estimate_cpk(x, record.spec)
    values, skipped = _bootstrap_cpk(x, record.spec, reps, seed)
    if values.size == 0:
        raise ZeroVarianceError(f"dimension {record.dimension_id!r}: no resample had nonzero variance")
    if skipped:
        logger.warning("dimension %s: %d of %d resamples skipped (zero variance)", record.dimension_id, skipped, reps)

    p_hat = float(np.mean(values >= c0))
    return BootstrapSummary(
        dimension_id=record.dimension_id,
        n=record.n,
        reps=reps,
        valid_reps=int(values.size),
        skipped=skipped,
        cpk_hat=est.cpk,
        p_hat=p_hat,
        flip_rate=flip_rate(p_hat),
        seed=seed,
    )


def analyze_dataset(
    records: Sequence[DimensionRecord],
    c0: float,
    reps: int,
    base_seed: SeedPath,
    threads: int = 1,
) -> DatasetInstability:
    """Bootstrap every record and summarise the flip-rate distribution.

    A failing record is reported in ``errors`` and does not stop the others.
    """
    if len(records) == 0:
        raise InvalidInputError("at least one dimension record is required")

    def run(item):
        index, record = item
        try:
            return bootstrap_dimension(record, c0, reps, base_seed.child(index))
        except CapgateError as exc:
            logger.warning("dimension %s skipped: %s", record.dimension_id, exc.detail)
            return RecordError(dimension_id=record.dimension_id, detail=exc.detail)

    results = map_ordered(run, list(enumerate(records)), threads, label="dimension")
    summaries = [r for r in results if isinstance(r, BootstrapSummary)]
    errors = [r for r in results if isinstance(r, RecordError)]

    stats = {}
    if summaries:
        flips = np.array([s.flip_rate for s in summaries])
        stats = dict(
            median_flip=float(np.median(flips)),
            share_above_20=float(np.mean(flips > FLIP_THRESHOLDS[0])),
            share_above_30=float(np.mean(flips > FLIP_THRESHOLDS[1])),
            percentile_90=float(np.percentile(flips, 90)),
        )
    return DatasetInstability(c0=c0, reps=reps, summaries=summaries, errors=errors, **stats)


def instability_curve(
    summaries: Sequence[BootstrapSummary],
    c0: float,
    n_bins: int,
    max_distance: float = 2.0,
) -> InstabilityCurve:
    """Bin-averaged flip rate against distance |cpk_hat - c0|, quantile-based bins."""
    if n_bins < 2:
        raise InvalidInputError(f"n_bins must be at least 2, got {n_bins}")
    if not max_distance > 0:
        raise InvalidInputError(f"max_distance must be > 0, got {max_distance}")

    distance = np.array([abs(s.cpk_hat - c0) for s in summaries])
    flips = np.array([s.flip_rate for s in summaries])
    keep = distance <= max_distance
    distance, flips = distance[keep], flips[keep]
    if distance.size < n_bins:
        raise InvalidInputError(
            f"only {distance.size} dimensions within distance {max_distance} of c0; need at least {n_bins}"
        )

    # Ties can merge quantile edges; keep the distinct ones.
    edges = np.unique(np.quantile(distance, np.linspace(0.0, 1.0, n_bins + 1)))
    if edges.size < 2:
        edges = np.array([distance[0], distance[0]])
    which = np.clip(np.searchsorted(edges, distance, side="right") - 1, 0, edges.size - 2)

    bins: List[InstabilityBin] = []
    for k in range(edges.size - 1):
        members = flips[which == k]
        if members.size == 0:
            continue
        q25, q75 = np.percentile(members, [25, 75])
        bins.append(
            InstabilityBin(
                distance_lo=float(edges[k]),
                distance_hi=float(edges[k + 1]),
                mean_flip=float(members.mean()),
                q25_flip=float(q25),
                q75_flip=float(q75),
                count=int(members.size),
            )
        )
    return InstabilityCurve(c0=c0, max_distance=max_distance, bins=bins)
