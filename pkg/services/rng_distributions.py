"""Seeded sampling and the scalar normal special functions.

Every stochastic computation draws from a ``SeedPath``; normal variates are
produced by the inverse-CDF transform, one uniform per variate, so stream
accounting is exact.
"""

import math
from typing import Tuple, Union

import numpy as np
from scipy import special

from models.process.process_models import ProcessFamily, ProcessModel, SeedPath
from services.errors import InvalidInputError

# Uniforms are (k + 1/2) / 2^52 for a 52-bit integer k; both steps are exact,
# so every value lies in [2^-53, 1 - 2^-53].
_UNIFORM_BITS = 52
_UNIFORM_SCALE = 2.0**-_UNIFORM_BITS


def normal_cdf(x: float) -> float:
    if not math.isfinite(x):
        raise InvalidInputError(f"normal_cdf requires a finite argument, got {x}")
    return float(special.ndtr(x))


def normal_quantile(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise InvalidInputError(f"normal_quantile requires 0 < p < 1, got {p}")
    return float(special.ndtri(p))


def open_uniforms(rng: np.random.Generator, shape: Union[int, Tuple[int, ...]]) -> np.ndarray:
    k = rng.integers(0, 2**_UNIFORM_BITS, size=shape, dtype=np.int64)
    return (k + 0.5) * _UNIFORM_SCALE


def standard_normals(rng: np.random.Generator, shape: Union[int, Tuple[int, ...]]) -> np.ndarray:
    return special.ndtri(open_uniforms(rng, shape))


def transform(model: ProcessModel, z: np.ndarray) -> np.ndarray:
    """Map standard normal variates onto the model's scale."""
    if model.family == ProcessFamily.NORMAL:
        return model.mu + model.sigma * z
    return model.shift + np.exp(model.log_mu + model.log_sigma * z)


def draw(model: ProcessModel, rng: np.random.Generator, shape: Union[int, Tuple[int, ...]]) -> np.ndarray:
    return transform(model, standard_normals(rng, shape))


def sample(model: ProcessModel, n: int, seed: SeedPath) -> np.ndarray:
    """n i.i.d. draws from ``model``; bit-identical for equal (model, n, seed)."""
    if n < 2:
        raise InvalidInputError(f"sample size must be at least 2, got {n}")
    return draw(model, seed.generator(), n)


def sample_matrix(model: ProcessModel, reps: int, n: int, seed: SeedPath) -> np.ndarray:
    """A (reps, n) block of independent samples drawn from one stream."""
    if n < 2:
        raise InvalidInputError(f"sample size must be at least 2, got {n}")
    if reps < 1:
        raise InvalidInputError(f"reps must be at least 1, got {reps}")
    return draw(model, seed.generator(), (reps, n))
