import math

import numpy as np
import pytest
from pydantic import ValidationError

from models.capability.capability_models import ActiveSide, QuantileTriple, SpecLimits
from models.process.process_models import ProcessFamily, ProcessModel
from models.simulation.simulation_models import CalibrationMode
from services.capability_core import (
    calibrate_model,
    cnpk_point,
    cpk_point,
    estimate_cnpk,
    estimate_cpk,
    exact_quantiles,
    true_capability,
)
from services.errors import InvalidInputError, ZeroVarianceError
from services.rng_distributions import sample


def test_cpk_point_centered_is_tied():
    est = cpk_point(10.0, 1.0, SpecLimits(lsl=4, usl=16))
    assert est.cpk == 2.0
    assert est.active_side == ActiveSide.TIED


def test_cpk_point_upper_active():
    est = cpk_point(12.0, 1.0, SpecLimits(lsl=4, usl=16))
    assert est.cpk == pytest.approx(4 / 3)
    assert est.active_side == ActiveSide.UPPER


def test_cpk_point_unilateral():
    est = cpk_point(0.0, 1.0, SpecLimits(usl=3.99))
    assert est.cpk == pytest.approx(1.33)
    assert est.cpl == math.inf
    assert est.active_side == ActiveSide.UPPER


def test_cpk_point_rejects_nonpositive_sigma():
    with pytest.raises(InvalidInputError):
        cpk_point(0.0, 0.0, SpecLimits(lsl=-1, usl=1))


def test_estimate_cpk_hand_oracle():
    summary, est = estimate_cpk([9, 10, 11], SpecLimits(lsl=4, usl=16))
    assert summary.mean == 10.0
    assert summary.sd == 1.0
    assert est.cpk == 2.0


def test_estimate_cpk_zero_variance():
    with pytest.raises(ZeroVarianceError):
        estimate_cpk([5, 5, 5], SpecLimits(lsl=0, usl=10))


def test_estimate_cpk_consistency(seed):
    x = sample(ProcessModel.normal(mu=12.0, sigma=1.0), 1_000_000, seed)
    _, est = estimate_cpk(x, SpecLimits(lsl=4, usl=16))
    assert est.cpk == pytest.approx(4 / 3, abs=0.01)


def test_estimate_cpk_affine_invariance(seed):
    x = sample(ProcessModel.normal(mu=1.0, sigma=0.3), 40, seed)
    spec = SpecLimits(lsl=0.0, usl=2.5)
    _, base = estimate_cpk(x, spec)
    _, moved = estimate_cpk(x * 2.5 + 7.0, spec.shifted(7.0, scale=2.5))
    assert moved.cpk == pytest.approx(base.cpk, rel=1e-12)


def test_min_consistency(seed):
    x = sample(ProcessModel.normal(mu=0.2, sigma=1.0), 30, seed)
    _, est = estimate_cpk(x, SpecLimits(lsl=-3, usl=4))
    assert est.cpk <= est.cpu and est.cpk <= est.cpl


def test_cnpk_point_reduces_to_cpk():
    q = QuantileTriple(p00135=-3.0, p50=0.0, p99865=3.0)
    assert cnpk_point(q, SpecLimits(lsl=-4, usl=4)) == pytest.approx(4 / 3)
    assert cnpk_point(q, SpecLimits(lsl=-4, usl=2)) == pytest.approx(2 / 3)


def test_cnpk_equals_cpk_on_exact_normal_quantiles():
    rng = np.random.default_rng(11)
    for _ in range(100):
        mu = rng.uniform(-10, 10)
        sigma = rng.uniform(0.1, 5)
        lsl = mu - rng.uniform(0.5, 6) * sigma
        usl = mu + rng.uniform(0.5, 6) * sigma
        spec = SpecLimits(lsl=lsl, usl=usl)
        model = ProcessModel.normal(mu=mu, sigma=sigma)
        assert cnpk_point(exact_quantiles(model), spec) == pytest.approx(cpk_point(mu, sigma, spec).cpk, abs=1e-12)


def test_cnpk_lognormal_exact_quantiles():
    model = ProcessModel.shifted_lognormal(shift=0.0, log_mu=0.0, log_sigma=0.25)
    q = exact_quantiles(model)
    assert q.p50 == 1.0
    assert q.p99865 == pytest.approx(math.exp(0.75))
    expected = min((3.0 - 1.0) / (math.exp(0.75) - 1.0), (1.0 - 0.2) / (1.0 - math.exp(-0.75)))
    assert cnpk_point(q, SpecLimits(lsl=0.2, usl=3.0)) == pytest.approx(expected, rel=1e-12)


def test_cnpk_requires_bilateral_spec():
    q = QuantileTriple(p00135=-3.0, p50=0.0, p99865=3.0)
    with pytest.raises(InvalidInputError):
        cnpk_point(q, SpecLimits(usl=4))


def test_estimate_cnpk_normal(seed):
    x = sample(ProcessModel.normal(mu=0.0, sigma=1.0), 1_000_000, seed)
    assert estimate_cnpk(x, SpecLimits(lsl=-4, usl=4)) == pytest.approx(4 / 3, abs=0.02)


def test_estimate_cnpk_lognormal(seed):
    model = ProcessModel.shifted_lognormal(shift=0.0, log_mu=0.0, log_sigma=0.25)
    spec = SpecLimits(lsl=0.2, usl=3.0)
    x = sample(model, 1_000_000, seed)
    assert estimate_cnpk(x, spec) == pytest.approx(true_capability(model, spec), abs=0.03)


def test_estimate_cnpk_degenerate_and_small():
    with pytest.raises(ZeroVarianceError):
        estimate_cnpk([1.0] * 30, SpecLimits(lsl=0, usl=2))
    with pytest.raises(InvalidInputError):
        estimate_cnpk(list(range(10)), SpecLimits(lsl=-100, usl=100))


def test_estimate_cnpk_warns_when_extrapolating(seed, caplog):
    x = sample(ProcessModel.normal(mu=0.0, sigma=1.0), 50, seed)
    with caplog.at_level("WARNING"):
        estimate_cnpk(x, SpecLimits(lsl=-4, usl=4))
    assert "extrapolated" in caplog.text


def test_calibrate_normal_one_sided():
    model, spec = calibrate_model(1.33, CalibrationMode.ONE_SIDED, ProcessFamily.NORMAL)
    assert (model.mu, model.sigma) == (0.0, 1.0)
    assert spec.usl == pytest.approx(3.99)
    assert spec.lsl == -math.inf


def test_calibrate_normal_centered():
    model, spec = calibrate_model(1.0, CalibrationMode.CENTERED, ProcessFamily.NORMAL)
    assert (spec.lsl, spec.usl) == (-3.0, 3.0)
    assert cpk_point(model.mu, model.sigma, spec).tied


def test_calibrate_lognormal_one_sided():
    model, spec = calibrate_model(1.33, CalibrationMode.ONE_SIDED, ProcessFamily.SHIFTED_LOGNORMAL, 0.25)
    q = exact_quantiles(model)
    assert (spec.usl - q.p50) / (q.p99865 - q.p50) == pytest.approx(1.33, rel=1e-12)
    assert (q.p50 - spec.lsl) / (q.p50 - q.p00135) > 1.33
    assert true_capability(model, spec) == pytest.approx(1.33, rel=1e-12)


@pytest.mark.parametrize("target", [0.0, -1.0, float("inf")])
def test_calibrate_rejects_bad_target(target):
    with pytest.raises(InvalidInputError):
        calibrate_model(target)


def test_spec_limits_validation():
    with pytest.raises(ValidationError):
        SpecLimits(lsl=2.0, usl=1.0)
    with pytest.raises(ValidationError):
        SpecLimits()
