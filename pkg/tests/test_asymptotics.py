import math

import pytest

from services.asymptotics import (
    acceptance_prob_asymptotic,
    acceptance_prob_margin,
    calibrate_margin,
    estimator_sd_approx,
    instability_band,
    local_limit,
    sigma_c_closed_form,
    z_score,
)
from services.errors import InvalidInputError


@pytest.mark.parametrize(
    "cpk, expected",
    [(0.0, 1 / 3), (1.0, 0.78174), (1.33, 0.99778)],
)
def test_sigma_c_closed_form(cpk, expected):
    assert sigma_c_closed_form(cpk) == pytest.approx(expected, abs=5e-5)


def test_sigma_c_rejects_negative():
    with pytest.raises(InvalidInputError):
        sigma_c_closed_form(-0.1)


def test_boundary_acceptance_is_one_half():
    for n in (2, 32, 10_000):
        assert acceptance_prob_asymptotic(1.33, 1.33, n, 0.7) == 0.5


def test_acceptance_at_scaled_boundary():
    assert acceptance_prob_asymptotic(1.33 + 0.2908, 1.33, 32, 1.00) == pytest.approx(0.95, abs=5e-4)


def test_acceptance_away_from_boundary():
    assert acceptance_prob_asymptotic(1.40, 1.33, 1_000_000, 1.0) >= 1 - 1e-9


def test_acceptance_monotonicity():
    below = [acceptance_prob_asymptotic(1.30, 1.33, n, 1.0) for n in (16, 64, 256)]
    above = [acceptance_prob_asymptotic(1.36, 1.33, n, 1.0) for n in (16, 64, 256)]
    assert below == sorted(below, reverse=True)
    assert above == sorted(above)
    values = [acceptance_prob_asymptotic(c, 1.33, 32, 1.0) for c in (1.2, 1.3, 1.4, 1.5)]
    assert values == sorted(values)


def test_complement_symmetry():
    for delta in (0.01, 0.05, 0.2):
        up = acceptance_prob_asymptotic(1.33 + delta, 1.33, 50, 0.9)
        down = acceptance_prob_asymptotic(1.33 - delta, 1.33, 50, 0.9)
        assert up + down == pytest.approx(1.0, abs=1e-12)


def test_local_limit():
    assert local_limit(0.0, 0.8) == 0.5
    assert local_limit(1.645, 1.0) == pytest.approx(0.95, abs=5e-4)
    assert local_limit(-0.7, 1.2) == pytest.approx(1 - local_limit(0.7, 1.2), abs=1e-15)


def test_instability_band_reference():
    band = instability_band(1.33, 32, 1.00, 0.45)
    assert band.half_width == pytest.approx(0.2908, abs=1e-4)
    assert band.lower == pytest.approx(1.0392, abs=1e-4)
    assert band.upper == pytest.approx(1.6208, abs=1e-4)


def test_instability_band_endpoints_match_local_limit():
    band = instability_band(1.33, 128, 0.9, 0.3)
    h = math.sqrt(128) * (band.upper - band.c0)
    assert abs(local_limit(h, 0.9) - 0.5) == pytest.approx(0.3, abs=1e-12)


def test_instability_band_scaling():
    assert instability_band(1.33, 32, 1.0, 1e-9).width < 1e-8
    wide = instability_band(1.33, 32, 1.0, 0.45).width
    narrow = instability_band(1.33, 128, 1.0, 0.45).width
    assert narrow == pytest.approx(wide / 2, rel=1e-12)


@pytest.mark.parametrize("epsilon", [0.0, 0.5, -0.1])
def test_instability_band_rejects_epsilon(epsilon):
    with pytest.raises(InvalidInputError):
        instability_band(1.33, 32, 1.0, epsilon)


def test_calibrate_margin_reference():
    cal = calibrate_margin(1.33, 32, 1.00, 0.05)
    assert cal.kappa == pytest.approx(1.6449, abs=5e-4)
    assert cal.margin == pytest.approx(0.29078, abs=1e-4)
    assert cal.adjusted_threshold == pytest.approx(1.6208, abs=1e-4)


def test_calibrate_margin_half_alpha_is_no_margin():
    cal = calibrate_margin(1.33, 32, 1.00, 0.5)
    assert cal.kappa == 0.0
    assert cal.adjusted_threshold == 1.33


def test_margin_halves_when_n_quadruples():
    assert calibrate_margin(1.33, 128, 1.0, 0.05).margin == pytest.approx(
        calibrate_margin(1.33, 32, 1.0, 0.05).margin / 2, rel=1e-12
    )


def test_margin_rule_boundary_acceptance_is_alpha():
    cal = calibrate_margin(1.33, 32, 0.99778, 0.05)
    assert acceptance_prob_margin(1.33, 1.33, 32, 0.99778, cal.kappa) == pytest.approx(0.05, abs=1e-12)


def test_estimator_sd_approx():
    assert estimator_sd_approx(1.33, 32) == pytest.approx(0.1764, abs=1e-4)
    assert estimator_sd_approx(0.0, 9) == pytest.approx(1 / 9)


def test_z_score():
    assert z_score(1.38, 1.33, 32, 0.998) == pytest.approx(math.sqrt(32) * 0.05 / 0.998)
    with pytest.raises(InvalidInputError):
        z_score(1.38, 1.33, 32, 0.0)
