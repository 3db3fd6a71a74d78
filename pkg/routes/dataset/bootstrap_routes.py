import logging

from pydantic import Field

from routes.run_options import RunRequest, add_run_arguments
from services import plot_scripts
from services.dataset_io import parse_dimensions
from services.errors import InvalidInputError
from services.output_writer import OutputWriter
from services.resampling import DEFAULT_BOOTSTRAP_REPS, analyze_dataset, instability_curve

logger = logging.getLogger(__name__)


class BootstrapRequest(RunRequest):
    input: str
    bins: int = Field(default=10, ge=2)
    max_distance: float = Field(default=2.0, gt=0)


def register(subparsers) -> None:
    parser = subparsers.add_parser("bootstrap", help="bootstrap decision flip rates per dimension")
    parser.add_argument("input", help="long CSV: dimension_id,lsl,usl,nominal,value")
    parser.add_argument("--bins", type=int, default=10, help="quantile bins of the instability curve")
    parser.add_argument("--max-distance", type=float, default=2.0, help="curve truncation |cpk_hat - c0|")
    add_run_arguments(parser, default_reps=DEFAULT_BOOTSTRAP_REPS)
    parser.set_defaults(handler=handle, request_model=BootstrapRequest)


def handle(request: BootstrapRequest, out: OutputWriter) -> dict:
    records = parse_dimensions(request.input)
    result = analyze_dataset(records, request.c0, request.reps, request.seed_path(), threads=request.threads)
    rows = [s.model_dump(exclude={"seed"}) for s in result.summaries]
    path = out.write_data("bootstrap", result, rows)

    curve = None
    try:
        curve = instability_curve(result.summaries, request.c0, request.bins, request.max_distance)
    except InvalidInputError as exc:
        logger.warning("instability curve not written: %s", exc.detail)
    if curve is not None:
        curve_rows = [
            {**b.model_dump(), "distance_mid": (b.distance_lo + b.distance_hi) / 2.0} for b in curve.bins
        ]
        curve_path = out.write_data("instability_curve", curve, curve_rows)
        if request.gnuplot_script:
            out.write_text(
                "instability_curve.gp",
                plot_scripts.render("bootstrap", "instability_curve", curve_path.name),
            )
    return {
        "command": "bootstrap",
        "scope": "conditional_given_data",
        "dimensions": len(result.summaries),
        "errors": len(result.errors),
        "median_flip": result.median_flip,
        "share_above_20": result.share_above_20,
        "share_above_30": result.share_above_30,
        "percentile_90": result.percentile_90,
        "data": path.name,
    }
