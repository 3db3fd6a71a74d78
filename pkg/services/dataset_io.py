"""Measurement datasets: long-CSV ingestion, normality screening,
threshold-concentration tables and synthetic generation.

Input schema (UTF-8, header required), one row per measurement::

    dimension_id,lsl,usl,nominal,value

``nominal`` may be empty; ``inf``/``-inf`` mark an absent limit. Rows of one
dimension are contiguous and repeat the same limits.
"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import stats

from models.capability.capability_models import SpecLimits
from models.dataset.dataset_models import (
    ConcentrationBand,
    ConcentrationTable,
    DimensionEstimate,
    DimensionRecord,
    NormalityResult,
    RecordError,
    StratifiedConcentration,
    SyntheticStratum,
)
from models.process.process_models import SeedPath
from services.asymptotics import calibrate_margin, sigma_c_closed_form
from services.capability_core import calibrate_model, estimate_cpk, exact_quantiles
from services.errors import CapgateError, InvalidInputError, SchemaError, ZeroVarianceError
from services.rng_distributions import normal_quantile, sample

logger = logging.getLogger(__name__)

COLUMNS = ("dimension_id", "lsl", "usl", "nominal", "value")

MIN_NORMALITY_N = 8
DEFAULT_NORMALITY_ALPHA = 0.05
# Critical values of the corrected Anderson-Darling statistic, normal
# distribution with estimated mean and variance.
AD_CRITICAL_VALUES = {0.10: 0.631, 0.05: 0.752, 0.025: 0.873, 0.01: 1.035, 0.005: 1.159}

DEFAULT_HALF_WIDTHS = (0.01, 0.02, 0.05, 0.10, 0.15, 0.20)
BAND_TOLERANCE = 1e-12

SYNTHETIC_PREFIX = "syn"


def _parse_float(text: str, column: str, line: int, dimension_id: Optional[str], allow_inf: bool) -> float:
    try:
        value = float(text.strip())
    except ValueError:
        raise SchemaError(f"column {column!r}: {text!r} is not a number", line, dimension_id)
    if math.isnan(value) or (math.isinf(value) and not allow_inf):
        raise SchemaError(f"column {column!r}: value must be finite, got {text!r}", line, dimension_id)
    return value


def parse_dimensions(path: Union[str, Path], format: str = "long_csv") -> List[DimensionRecord]:
    """Read and validate a long-format measurement file."""
    if format != "long_csv":
        raise InvalidInputError(f"unsupported input format {format!r}")
    try:
        frame = pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            encoding="utf-8",
            skipinitialspace=True,
            skip_blank_lines=False,
        )
    except FileNotFoundError:
        raise InvalidInputError(f"input file not found: {path}")
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise SchemaError(f"cannot parse {path}: {exc}")
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}")

    missing = [c for c in COLUMNS if c not in frame.columns]
    if missing:
        raise SchemaError(f"missing columns {missing}; expected header {','.join(COLUMNS)}", line=1)
    frame = frame.fillna("")

    order: List[str] = []
    limits: Dict[str, Tuple[float, float, Optional[float]]] = {}
    values: Dict[str, List[float]] = {}
    first_line: Dict[str, int] = {}

    # Blank lines are kept as empty rows so the index tracks physical lines.
    for offset, row in enumerate(frame[list(COLUMNS)].itertuples(index=False)):
        line = offset + 2
        if not any(field.strip() for field in row):
            continue
        dimension_id = row.dimension_id.strip()
        if not dimension_id:
            raise SchemaError("empty dimension_id", line)
        lsl = _parse_float(row.lsl, "lsl", line, dimension_id, allow_inf=True)
        usl = _parse_float(row.usl, "usl", line, dimension_id, allow_inf=True)
        nominal = _parse_float(row.nominal, "nominal", line, dimension_id, False) if row.nominal.strip() else None
        value = _parse_float(row.value, "value", line, dimension_id, allow_inf=False)
        if not lsl < usl:
            raise SchemaError(f"usl ({usl}) must exceed lsl ({lsl})", line, dimension_id)
        if math.isinf(lsl) and math.isinf(usl):
            raise SchemaError("at least one specification limit must be finite", line, dimension_id)

        if dimension_id not in limits:
            order.append(dimension_id)
            limits[dimension_id] = (lsl, usl, nominal)
            values[dimension_id] = []
            first_line[dimension_id] = line
        elif order[-1] != dimension_id:
            raise SchemaError(
                f"duplicate dimension block; first seen at line {first_line[dimension_id]}",
                line,
                dimension_id,
            )
        elif limits[dimension_id] != (lsl, usl, nominal):
            raise SchemaError("specification limits or nominal differ from earlier rows", line, dimension_id)
        values[dimension_id].append(value)

    if not order:
        raise SchemaError(f"{path} contains no measurements")

    records = []
    for dimension_id in order:
        lsl, usl, nominal = limits[dimension_id]
        if len(values[dimension_id]) < 2:
            raise SchemaError(
                f"at least 2 measurements are required, got {len(values[dimension_id])}",
                first_line[dimension_id],
                dimension_id,
            )
        records.append(
            DimensionRecord(
                dimension_id=dimension_id,
                spec=SpecLimits(lsl=lsl, usl=usl),
                nominal=nominal,
                measurements=values[dimension_id],
            )
        )
    logger.info("parsed %d dimensions from %s", len(records), path)
    return records


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else format(x, ".17g")


def write_dimensions(records: Sequence[DimensionRecord], path: Union[str, Path]) -> Path:
    rows = [
        (r.dimension_id, _fmt(r.spec.lsl), _fmt(r.spec.usl), _fmt(r.nominal), _fmt(x))
        for r in records
        for x in r.measurements
    ]
    path = Path(path)
    pd.DataFrame(rows, columns=list(COLUMNS)).to_csv(path, index=False, encoding="utf-8")
    return path


def anderson_darling(measurements: Sequence[float]) -> float:
    """A^2 for normality with mean and standard deviation estimated from the data."""
    x = np.asarray(measurements, dtype=float)
    if not x.std(ddof=1) > 0:
        raise ZeroVarianceError("normality test needs nonzero variance")
    return float(stats.anderson(x, dist="norm").statistic)


def _ad_p_value(a: float) -> float:
    if a < 0.2:
        p = 1.0 - math.exp(-13.436 + 101.14 * a - 223.73 * a**2)
    elif a < 0.34:
        p = 1.0 - math.exp(-8.318 + 42.796 * a - 59.938 * a**2)
    elif a < 0.6:
        p = math.exp(0.9177 - 4.279 * a - 1.38 * a**2)
    elif a <= 13:
        p = math.exp(1.2937 - 5.709 * a + 0.0186 * a**2)
    else:
        p = 0.0
    return min(max(p, 0.0), 1.0)


def normality_test(measurements: Sequence[float], alpha: float = DEFAULT_NORMALITY_ALPHA) -> NormalityResult:
    """Anderson-Darling test with estimated parameters and small-sample correction.

    Tabulated levels (see ``AD_CRITICAL_VALUES``) compare the corrected
    statistic with its critical value; any other ``alpha`` in (0, 1) passes
    when the approximate p-value is at least ``alpha``.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidInputError(f"alpha must lie in (0, 1), got {alpha}")
    x = np.asarray(measurements, dtype=float)
    if x.size < MIN_NORMALITY_N:
        raise InvalidInputError(f"normality test needs n >= {MIN_NORMALITY_N}, got {x.size}")
    if np.ptp(x) == 0:
        raise ZeroVarianceError("normality test needs nonzero variance")
    n = x.size
    a2 = anderson_darling(x)
    corrected = a2 * (1.0 + 0.75 / n + 2.25 / n**2)
    p_value = _ad_p_value(corrected)
    critical = AD_CRITICAL_VALUES.get(alpha)
    return NormalityResult(
        n=n,
        statistic=a2,
        corrected_statistic=corrected,
        critical_value=critical,
        p_value=p_value,
        alpha=alpha,
        passed=corrected < critical if critical is not None else p_value >= alpha,
    )


def default_half_widths(sigma_c: float, n: int) -> List[float]:
    """Fixed bands plus the one-sided 95 % band sigma_c * z_0.95 / sqrt(n)."""
    if not sigma_c > 0 or n < 1:
        raise InvalidInputError("sigma_c must be > 0 and n at least 1")
    return sorted(DEFAULT_HALF_WIDTHS + (sigma_c * normal_quantile(0.95) / math.sqrt(n),))


def concentration_table(
    estimates: Sequence[Tuple[str, float]],
    c0: float,
    half_widths: Sequence[float],
) -> ConcentrationTable:
    """Cumulative count of estimates within each half-width of c0."""
    if len(estimates) == 0:
        raise InvalidInputError("concentration table needs at least one estimate")
    if any(b < a for a, b in zip(half_widths, half_widths[1:])):
        raise InvalidInputError("half_widths must be sorted ascending")
    if any(not w >= 0 for w in half_widths):
        raise InvalidInputError("half_widths must be nonnegative")
    distance = np.abs(np.array([cpk for _, cpk in estimates], dtype=float) - c0)
    total = int(distance.size)
    bands = []
    for w in half_widths:
        count = int(np.count_nonzero(distance <= w + BAND_TOLERANCE))
        bands.append(ConcentrationBand(half_width=w, count=count, share=count / total))
    return ConcentrationTable(c0=c0, bands=bands, total=total)


def estimate_dimensions(
    records: Sequence[DimensionRecord],
    c0: float,
    alpha: float = DEFAULT_NORMALITY_ALPHA,
    normality_alpha: float = DEFAULT_NORMALITY_ALPHA,
) -> Tuple[List[DimensionEstimate], List[RecordError]]:
    """Estimate, gate and screen every record; failing records are collected."""
    estimates, errors = [], []
    for record in records:
        try:
            summary, est = estimate_cpk(record.measurements, record.spec)
        except CapgateError as exc:
            errors.append(RecordError(dimension_id=record.dimension_id, detail=exc.detail))
            continue
        margin = calibrate_margin(c0, summary.n, sigma_c_closed_form(c0), alpha)
        normality = None
        if summary.n >= MIN_NORMALITY_N:
            normality = normality_test(record.measurements, normality_alpha)
        estimates.append(
            DimensionEstimate(
                dimension_id=record.dimension_id,
                n=summary.n,
                mean=summary.mean,
                sd=summary.sd,
                cpu=est.cpu,
                cpl=est.cpl,
                cpk=est.cpk,
                active_side=est.active_side,
                accept=est.cpk >= c0,
                accept_margin=est.cpk >= margin.adjusted_threshold,
                margin_threshold=margin.adjusted_threshold,
                normality=normality,
            )
        )
    return estimates, errors


def stratified_concentration(
    estimates: Sequence[DimensionEstimate],
    c0: float,
    half_widths: Sequence[float],
) -> StratifiedConcentration:
    """Concentration over all dimensions and over the normality-passing subset."""
    pairs = [(e.dimension_id, e.cpk) for e in estimates]
    tested = [e for e in estimates if e.normality is not None]
    normal = [(e.dimension_id, e.cpk) for e in tested if e.normality.passed]
    return StratifiedConcentration(
        all_dimensions=concentration_table(pairs, c0, half_widths),
        normal_subset=concentration_table(normal, c0, half_widths) if normal else None,
        tested=len(tested),
        passed=len(normal),
    )


def synthetic_id(stratum: int, index: int, s: SyntheticStratum) -> str:
    return (
        f"{SYNTHETIC_PREFIX}:{stratum}:{index:04d}:cpk={s.true_cpk!r}:"
        f"{s.family.value}:{s.calibration_mode.value}"
    )


def synthetic_truth(dimension_id: str) -> float:
    """True capability encoded in a synthetic dimension id."""
    parts = dimension_id.split(":")
    if len(parts) != 6 or parts[0] != SYNTHETIC_PREFIX or not parts[3].startswith("cpk="):
        raise InvalidInputError(f"{dimension_id!r} is not a synthetic dimension id")
    return float(parts[3][len("cpk="):])


def generate_synthetic_dataset(strata: Sequence[SyntheticStratum], base_seed: SeedPath) -> List[DimensionRecord]:
    """Dimensions drawn from calibrated models; record (k, i) uses seed base.child(k, i)."""
    if len(strata) == 0:
        raise InvalidInputError("at least one stratum is required")
    records = []
    for k, stratum in enumerate(strata):
        model, spec = calibrate_model(stratum.true_cpk, stratum.calibration_mode, stratum.family)
        nominal = exact_quantiles(model).p50
        for i in range(stratum.count):
            records.append(
                DimensionRecord(
                    dimension_id=synthetic_id(k, i, stratum),
                    spec=spec,
                    nominal=nominal,
                    measurements=sample(model, stratum.n, base_seed.child(k, i)).tolist(),
                )
            )
    logger.info("generated %d synthetic dimensions in %d strata", len(records), len(strata))
    return records
