import numpy as np
import pytest
from pydantic import ValidationError

from models.process.process_models import ProcessModel, SeedPath, label_to_u64
from services.errors import InvalidInputError
from services.rng_distributions import (
    normal_cdf,
    normal_quantile,
    open_uniforms,
    sample,
    sample_matrix,
    standard_normals,
)


def test_normal_cdf_reference_values():
    assert normal_cdf(0.0) == 0.5
    assert normal_cdf(1.645) == pytest.approx(0.95, abs=5e-4)
    assert normal_cdf(-1.645) == pytest.approx(1.0 - normal_cdf(1.645), abs=1e-15)


def test_normal_cdf_rejects_non_finite():
    with pytest.raises(InvalidInputError):
        normal_cdf(float("inf"))
    with pytest.raises(InvalidInputError):
        normal_cdf(float("nan"))


def test_normal_quantile_reference_values():
    assert normal_quantile(0.5) == 0.0
    assert normal_quantile(0.95) == pytest.approx(1.6449, abs=5e-4)
    assert normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-6)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_normal_quantile_domain(p):
    with pytest.raises(InvalidInputError):
        normal_quantile(p)


def test_cdf_quantile_round_trip():
    for p in np.linspace(0.001, 0.999, 999):
        assert abs(normal_cdf(normal_quantile(p)) - p) <= 1e-8


def test_sample_is_deterministic(seed):
    model = ProcessModel.normal(mu=0.0, sigma=1.0)
    a = sample(model, 50, seed.child("cell", 3))
    b = sample(model, 50, seed.child("cell", 3))
    assert a.tobytes() == b.tobytes()


def test_distinct_paths_are_uncorrelated(seed):
    model = ProcessModel.normal(mu=0.0, sigma=1.0)
    a = sample(model, 100_000, seed.child(0))
    b = sample(model, 100_000, seed.child(1))
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01


def test_normal_sample_mean(seed):
    x = sample(ProcessModel.normal(mu=0.0, sigma=1.0), 1_000_000, seed)
    assert abs(x.mean()) < 4e-3


def test_lognormal_sample_median_and_support(seed):
    model = ProcessModel.shifted_lognormal(shift=0.0, log_mu=0.0, log_sigma=1.0)
    x = sample(model, 1_000_000, seed)
    assert np.median(x) == pytest.approx(1.0, rel=0.01)
    assert x.min() > 0.0


def test_zero_sigma_rejected():
    with pytest.raises(ValidationError):
        ProcessModel.normal(mu=5.0, sigma=0.0)


def test_sample_size_must_be_at_least_two(seed):
    with pytest.raises(InvalidInputError):
        sample(ProcessModel.normal(mu=0.0, sigma=1.0), 1, seed)


def test_sample_matrix_rows_come_from_one_stream(seed):
    model = ProcessModel.normal(mu=0.0, sigma=1.0)
    block = sample_matrix(model, 4, 10, seed)
    assert block.shape == (4, 10)
    # Row-major fill: the first row equals a plain draw of size 10.
    assert np.array_equal(block[0], sample(model, 10, seed))


def test_string_labels_fold_to_u64():
    assert label_to_u64("sigma_c") == label_to_u64("sigma_c")
    assert label_to_u64("sigma_c") != label_to_u64("retry")
    assert 0 <= label_to_u64("anything") < 2**64
    with pytest.raises(ValueError):
        label_to_u64(-1)


def test_seed_path_child_extends_path():
    root = SeedPath(base=7)
    assert root.child(1, 2).path == (1, 2)
    assert root.child(1).child(2) == root.child(1, 2)


class FixedIntegers:
    """Stands in for a Generator whose integer draws are known."""

    def __init__(self, values):
        self.values = values

    def integers(self, low, high, size=None, dtype=np.int64):
        assert (low, high) == (0, 2**52)
        return np.asarray(self.values, dtype=dtype).reshape(size)


def test_extreme_uniforms_stay_inside_unit_interval():
    extremes = [0, 2**52 - 1]
    u = open_uniforms(FixedIntegers(extremes), 2)
    assert u[0] == 2.0**-53
    assert u[1] == 1.0 - 2.0**-53
    assert np.all(np.isfinite(standard_normals(FixedIntegers(extremes), 2)))
