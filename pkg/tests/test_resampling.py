import numpy as np
import pytest

from models.capability.capability_models import SpecLimits
from models.dataset.dataset_models import BootstrapSummary, DimensionRecord, SyntheticStratum
from models.process.process_models import SeedPath
from services.dataset_io import generate_synthetic_dataset, synthetic_truth
from services.errors import InvalidInputError, ZeroVarianceError
from services.resampling import analyze_dataset, bootstrap_dimension, flip_rate, instability_curve


def record(values, lsl=0.0, usl=10.0, dimension_id="d1"):
    return DimensionRecord(dimension_id=dimension_id, spec=SpecLimits(lsl=lsl, usl=usl), measurements=values)


def summary(dimension_id, cpk_hat, flip):
    return BootstrapSummary(
        dimension_id=dimension_id,
        n=32,
        reps=1000,
        valid_reps=1000,
        cpk_hat=cpk_hat,
        p_hat=flip,
        flip_rate=flip,
        seed=SeedPath(base=1),
    )


def test_flip_rate_bounds():
    assert flip_rate(1.0) == 0.0
    assert flip_rate(0.0) == 0.0
    assert flip_rate(0.5) == 0.5
    assert flip_rate(0.8) == pytest.approx(0.2)


def test_far_from_threshold_is_stable(seed):
    rng = np.random.default_rng(3)
    values = (5.0 + 0.3 * rng.standard_normal(32)).tolist()
    rec = record(values)
    result = bootstrap_dimension(rec, 1.33, 5000, seed)
    assert result.cpk_hat > 3.0
    assert result.flip_rate <= 0.001
    assert result.valid_reps == 5000


def test_bootstrap_is_deterministic(seed):
    rec = record([4.1, 5.2, 4.8, 5.9, 5.0, 4.4, 5.3, 4.9])
    assert bootstrap_dimension(rec, 1.33, 2000, seed) == bootstrap_dimension(rec, 1.33, 2000, seed)


def test_bootstrap_validation(seed):
    with pytest.raises(ZeroVarianceError):
        bootstrap_dimension(record([5.0, 5.0, 5.0]), 1.33, 1000, seed)
    with pytest.raises(InvalidInputError):
        bootstrap_dimension(record([4.0, 5.0, 6.0]), 1.33, 999, seed)


def test_discretized_data_skips_degenerate_resamples(seed):
    # Two distinct values out of three: some resamples are constant.
    result = bootstrap_dimension(record([5.0, 5.0, 5.5]), 1.33, 2000, seed)
    assert result.skipped > 0
    assert result.valid_reps + result.skipped == result.reps
    assert 0.0 <= result.flip_rate <= 0.5


def test_analyze_far_dataset(seed):
    records = generate_synthetic_dataset([SyntheticStratum(true_cpk=3.0, n=32, count=100)], seed.child("data"))
    result = analyze_dataset(records, 1.33, 1000, seed, threads=2)
    assert result.median_flip == 0.0
    assert result.share_above_20 == 0.0
    assert len(result.summaries) == 100


def test_analyze_collects_record_errors(seed):
    good = record([4.1, 5.2, 4.8, 5.9, 5.0], dimension_id="good")
    empty = record([], dimension_id="empty")
    result = analyze_dataset([good, empty], 1.33, 1000, seed)
    assert [s.dimension_id for s in result.summaries] == ["good"]
    assert [e.dimension_id for e in result.errors] == ["empty"]


def test_analyze_is_independent_of_threads(seed):
    records = generate_synthetic_dataset([SyntheticStratum(true_cpk=1.33, n=20, count=12)], seed.child("data"))
    assert analyze_dataset(records, 1.33, 1000, seed, threads=1) == analyze_dataset(records, 1.33, 1000, seed, threads=3)


def test_analyze_rejects_empty_dataset(seed):
    with pytest.raises(InvalidInputError):
        analyze_dataset([], 1.33, 1000, seed)


@pytest.mark.slow
def test_flip_rates_on_mixed_dataset(seed):
    strata = [
        SyntheticStratum(true_cpk=1.0, n=32, count=50),
        SyntheticStratum(true_cpk=1.33, n=32, count=100),
        SyntheticStratum(true_cpk=2.0, n=32, count=50),
    ]
    records = generate_synthetic_dataset(strata, seed.child("data"))
    result = analyze_dataset(records, 1.33, 5000, seed, threads=4)
    flips = {}
    for s in result.summaries:
        flips.setdefault(synthetic_truth(s.dimension_id), []).append(s.flip_rate)
    assert all(0.0 <= s.flip_rate <= 0.5 for s in result.summaries)
    boundary = np.array(flips[1.33])
    # A boundary dimension's approval frequency is close to uniform, so its
    # flip rate min(p, 1 - p) averages about 1/4.
    assert 0.18 <= boundary.mean() <= 0.32
    assert np.median(boundary) > 0.15
    assert np.mean(flips[2.0]) < boundary.mean()
    assert np.mean(flips[2.0]) < 0.1


@pytest.mark.slow
def test_flip_rate_is_negligible_far_above_threshold(seed):
    records = generate_synthetic_dataset([SyntheticStratum(true_cpk=3.0, n=32, count=50)], seed.child("data"))
    result = analyze_dataset(records, 1.33, 5000, seed, threads=4)
    assert max(s.flip_rate for s in result.summaries) <= 0.01


def test_instability_curve_counts_and_localization():
    summaries = [summary(f"d{k}", 1.33 + 0.05 * k, max(0.0, 0.45 - 0.1 * k)) for k in range(20)]
    summaries.append(summary("far", 5.0, 0.0))
    curve = instability_curve(summaries, 1.33, 4, max_distance=2.0)
    assert sum(b.count for b in curve.bins) == 20
    assert curve.bins[0].mean_flip == max(b.mean_flip for b in curve.bins)
    assert curve.bins[0].distance_lo == 0.0


@pytest.mark.slow
def test_instability_curve_localizes_on_synthetic_data(seed):
    strata = [SyntheticStratum(true_cpk=round(1.0 + 0.1 * k, 1), n=32, count=40) for k in range(11)]
    records = generate_synthetic_dataset(strata, seed.child("data"))
    result = analyze_dataset(records, 1.33, 1000, seed, threads=4)
    curve = instability_curve(result.summaries, 1.33, 10, max_distance=2.0)
    means = [b.mean_flip for b in curve.bins]
    assert means[0] == max(means)

    beyond = [b.mean_flip for b in curve.bins if b.distance_lo >= 0.5]
    assert len(beyond) >= 2
    assert all(later <= earlier + 0.005 for earlier, later in zip(beyond, beyond[1:]))

    far = [s.flip_rate for s in result.summaries if abs(s.cpk_hat - 1.33) > 1.0]
    assert far
    assert np.mean(far) < 0.01


def test_instability_curve_needs_in_range_dimensions():
    summaries = [summary(f"d{k}", 4.0 + k, 0.0) for k in range(5)]
    with pytest.raises(InvalidInputError):
        instability_curve(summaries, 1.33, 2, max_distance=2.0)
    with pytest.raises(InvalidInputError):
        instability_curve(summaries, 1.33, 1, max_distance=2.0)
