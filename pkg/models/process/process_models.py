import hashlib
import math
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

UINT64_MAX = 2**64 - 1


def label_to_u64(label: Union[int, str]) -> int:
    """Fold a context label into a 64-bit path entry."""
    if isinstance(label, bool):
        raise TypeError("seed labels must be int or str")
    if isinstance(label, int):
        if not 0 <= label <= UINT64_MAX:
            raise ValueError(f"seed label {label} outside the 64-bit unsigned range")
        return label
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class SeedPath(BaseModel):
    """A base seed plus an ordered path of context labels.

    Equal (base, path) pairs always give the same stream; distinct paths
    from one base give independent streams (SeedSequence spawn keys
    feeding a counter-based Philox generator).
    """

    model_config = ConfigDict(frozen=True)

    base: int = Field(ge=0, le=UINT64_MAX)
    path: Tuple[int, ...] = ()

    @field_validator("path")
    def validate_path(cls, v):
        for entry in v:
            if not 0 <= entry <= UINT64_MAX:
                raise ValueError("path entries must be 64-bit unsigned integers")
        return v

    def child(self, *labels: Union[int, str]) -> "SeedPath":
        return SeedPath(base=self.base, path=self.path + tuple(label_to_u64(x) for x in labels))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.base, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(seq))


class ProcessFamily(str, Enum):
    NORMAL = "normal"
    SHIFTED_LOGNORMAL = "shifted_lognormal"


class ProcessModel(BaseModel):
    """Sampling model of a process characteristic.

    normal uses (mu, sigma); shifted_lognormal uses (shift, log_mu, log_sigma)
    and has support (shift, inf).
    """

    model_config = ConfigDict(frozen=True)

    family: ProcessFamily
    mu: Optional[float] = None
    sigma: Optional[float] = None
    shift: Optional[float] = None
    log_mu: Optional[float] = None
    log_sigma: Optional[float] = None

    @model_validator(mode="after")
    def validate_parameters(self):
        if self.family == ProcessFamily.NORMAL:
            if self.mu is None or self.sigma is None:
                raise ValueError("normal model requires mu and sigma")
            if not math.isfinite(self.mu) or not math.isfinite(self.sigma):
                raise ValueError("normal parameters must be finite")
            if self.sigma <= 0:
                raise ValueError("sigma must be > 0")
        else:
            if self.shift is None or self.log_mu is None or self.log_sigma is None:
                raise ValueError("shifted_lognormal model requires shift, log_mu and log_sigma")
            if not all(math.isfinite(v) for v in (self.shift, self.log_mu, self.log_sigma)):
                raise ValueError("shifted_lognormal parameters must be finite")
            if self.log_sigma <= 0:
                raise ValueError("log_sigma must be > 0")
        return self

    @classmethod
    def normal(cls, mu: float, sigma: float) -> "ProcessModel":
        return cls(family=ProcessFamily.NORMAL, mu=mu, sigma=sigma)

    @classmethod
    def shifted_lognormal(cls, shift: float, log_mu: float, log_sigma: float) -> "ProcessModel":
        return cls(family=ProcessFamily.SHIFTED_LOGNORMAL, shift=shift, log_mu=log_mu, log_sigma=log_sigma)
