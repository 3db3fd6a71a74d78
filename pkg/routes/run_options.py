"""Flags and request fields shared by every subcommand."""

import argparse
from typing import Annotated, Any, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, field_validator

from config import DEFAULT_C0, get_log_level, get_out_dir, get_seed, get_threads
from models.process.process_models import UINT64_MAX, SeedPath
from services.errors import InvalidInputError


def split_list(value: Any) -> Any:
    """Accept "16,64,256" as well as a list."""
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


IntList = Annotated[List[int], BeforeValidator(split_list)]
FloatList = Annotated[List[float], BeforeValidator(split_list)]


def linear_grid(start: float, stop: float, step: float) -> List[float]:
    """Inclusive grid rounded to 10 decimals, so 1.33 lands exactly on 1.33."""
    if not step > 0:
        raise InvalidInputError("grid step must be > 0")
    if stop < start:
        raise InvalidInputError("grid stop must not be below start")
    return [float(x) for x in np.round(np.arange(start, stop + step / 2, step), 10)]


class RunRequest(BaseModel):
    model_config = ConfigDict(frozen=True, extra="ignore")

    seed: int = Field(ge=0, le=UINT64_MAX)
    threads: int = Field(ge=1)
    reps: Optional[int] = Field(default=None, ge=1)
    c0: float = Field(gt=0)
    out: str
    format: Literal["json", "csv"] = "json"
    gnuplot_script: bool = False
    log_level: str = "INFO"

    @field_validator("gnuplot_script")
    def validate_gnuplot(cls, v, info):
        if v and info.data.get("format") != "csv":
            raise ValueError("--gnuplot-script needs --format csv")
        return v

    def seed_path(self) -> SeedPath:
        return SeedPath(base=self.seed)


def add_run_arguments(parser: argparse.ArgumentParser, default_reps: Optional[int] = None) -> None:
    group = parser.add_argument_group("run options")
    group.add_argument("--seed", type=int, default=get_seed(), help="base seed, 0 .. 2^64-1 (env CAPGATE_SEED)")
    group.add_argument(
        "--threads", type=int, default=get_threads(), help="worker threads; changes wall time only (env CAPGATE_THREADS)"
    )
    group.add_argument("--reps", type=int, default=default_reps, help="Monte Carlo or bootstrap replicates")
    group.add_argument("--c0", type=float, default=DEFAULT_C0, help="approval threshold (default %(default)s)")
    group.add_argument("--out", default=get_out_dir(), help="output directory (env CAPGATE_OUT_DIR)")
    group.add_argument("--format", choices=["json", "csv"], default="json", help="data file format")
    group.add_argument(
        "--gnuplot-script", action="store_true", help="also write a gnuplot script for the CSV data"
    )
    group.add_argument("--log-level", default=get_log_level(), help="logging level (env CAPGATE_LOG_LEVEL)")
