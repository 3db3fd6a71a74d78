"""Normal-theory asymptotics of the plug-in C_pk estimator.

All functions take sigma_c explicitly so the closed form and a Monte Carlo
estimate are interchangeable.
"""

import math

from models.decision.decision_models import InstabilityBand, MarginCalibration
from services.errors import InvalidInputError
from services.rng_distributions import normal_cdf, normal_quantile


def _check_sigma_c(sigma_c: float) -> None:
    if not sigma_c > 0:
        raise InvalidInputError(f"sigma_c must be > 0, got {sigma_c}")


def _check_n(n: int) -> None:
    if n < 1:
        raise InvalidInputError(f"n must be at least 1, got {n}")


def sigma_c_closed_form(cpk_true: float) -> float:
    """sqrt(1/9 + C^2/2); valid only when one specification side is uniquely active."""
    if cpk_true < 0:
        raise InvalidInputError(f"cpk_true must be >= 0, got {cpk_true}")
    return math.sqrt(1.0 / 9.0 + cpk_true**2 / 2.0)


def estimator_sd_approx(cpk_true: float, n: int) -> float:
    _check_n(n)
    return sigma_c_closed_form(cpk_true) / math.sqrt(n)


def z_score(cpk_true: float, c0: float, n: int, sigma_c: float) -> float:
    _check_n(n)
    _check_sigma_c(sigma_c)
    return math.sqrt(n) * (cpk_true - c0) / sigma_c


def acceptance_prob_asymptotic(cpk_true: float, c0: float, n: int, sigma_c: float) -> float:
    return normal_cdf(z_score(cpk_true, c0, n, sigma_c))


def local_limit(h: float, sigma_c: float) -> float:
    """Limiting acceptance probability when C_true = C0 + h / sqrt(n)."""
    _check_sigma_c(sigma_c)
    return normal_cdf(h / sigma_c)


def acceptance_prob_margin(cpk_true: float, c0: float, n: int, sigma_c: float, kappa: float) -> float:
    """Asymptotic acceptance of the rule C_hat >= C0 + kappa / sqrt(n)."""
    _check_n(n)
    _check_sigma_c(sigma_c)
    return normal_cdf((math.sqrt(n) * (cpk_true - c0) - kappa) / sigma_c)


def instability_band(c0: float, n: int, sigma_c: float, epsilon: float) -> InstabilityBand:
    if not 0.0 < epsilon < 0.5:
        raise InvalidInputError(f"epsilon must lie in (0, 0.5), got {epsilon}")
    _check_n(n)
    _check_sigma_c(sigma_c)
    half = sigma_c * normal_quantile(0.5 + epsilon) / math.sqrt(n)
    return InstabilityBand(
        c0=c0,
        n=n,
        sigma_c=sigma_c,
        epsilon=epsilon,
        lower=c0 - half,
        upper=c0 + half,
        width=2.0 * half,
    )


def calibrate_margin(c0: float, n: int, sigma_c: float, alpha: float) -> MarginCalibration:
    """Guard band kappa = sigma_c * z_(1-alpha) giving boundary acceptance ~ alpha."""
    if not 0.0 < alpha < 1.0:
        raise InvalidInputError(f"alpha must lie in (0, 1), got {alpha}")
    _check_n(n)
    _check_sigma_c(sigma_c)
    kappa = sigma_c * normal_quantile(1.0 - alpha)
    margin = kappa / math.sqrt(n)
    return MarginCalibration(
        c0=c0,
        alpha=alpha,
        sigma_c=sigma_c,
        n=n,
        kappa=kappa,
        margin=margin,
        adjusted_threshold=c0 + margin,
    )
