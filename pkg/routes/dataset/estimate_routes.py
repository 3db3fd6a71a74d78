from typing import Optional

from pydantic import Field

from routes.run_options import FloatList, RunRequest, add_run_arguments
from services.asymptotics import sigma_c_closed_form
from services.dataset_io import (
    default_half_widths,
    estimate_dimensions,
    parse_dimensions,
    stratified_concentration,
)
from services.errors import InvalidInputError
from services.output_writer import OutputWriter


class EstimateRequest(RunRequest):
    input: str
    alpha: float = Field(default=0.05, gt=0, lt=1)
    normality_alpha: float = Field(default=0.05, gt=0, lt=1)
    sigma_c: Optional[float] = Field(default=None, gt=0)
    band_n: int = Field(default=32, ge=1)
    half_widths: Optional[FloatList] = None


def register(subparsers) -> None:
    parser = subparsers.add_parser("estimate", help="capability estimates, gate decisions and concentration table")
    parser.add_argument("input", help="long CSV: dimension_id,lsl,usl,nominal,value")
    parser.add_argument("--alpha", type=float, default=0.05, help="margin rule boundary acceptance")
    parser.add_argument(
        "--normality-alpha",
        type=float,
        default=0.05,
        help="Anderson-Darling significance level; 0.10, 0.05, 0.025, 0.01 and 0.005 use tabulated critical values",
    )
    parser.add_argument("--sigma-c", type=float, default=None, help="dispersion for the scaled band (default: closed form at c0)")
    parser.add_argument("--band-n", type=int, default=32, help="sample size for the scaled band")
    parser.add_argument("--half-widths", default=None, help="comma-separated ascending band half-widths")
    add_run_arguments(parser)
    parser.set_defaults(handler=handle, request_model=EstimateRequest)


def handle(request: EstimateRequest, out: OutputWriter) -> dict:
    records = parse_dimensions(request.input)
    estimates, errors = estimate_dimensions(records, request.c0, request.alpha, request.normality_alpha)
    if not estimates:
        raise InvalidInputError("no dimension could be estimated")

    sigma_c = request.sigma_c if request.sigma_c is not None else sigma_c_closed_form(request.c0)
    half_widths = request.half_widths or default_half_widths(sigma_c, request.band_n)
    concentration = stratified_concentration(estimates, request.c0, half_widths)

    payload = {
        "c0": request.c0,
        "dimensions": estimates,
        "errors": errors,
        "concentration": concentration,
    }
    rows = [
        {k: v for k, v in e.model_dump().items() if k != "normality"}
        | {
            "normality_statistic": e.normality.corrected_statistic if e.normality else None,
            "normality_passed": e.normality.passed if e.normality else None,
        }
        for e in estimates
    ]
    path = out.write_data("estimate", payload, rows)
    if out.format == "csv":
        out.write_json("concentration", concentration)
    return {
        "command": "estimate",
        "dimensions": len(estimates),
        "errors": len(errors),
        "accepted": sum(e.accept for e in estimates),
        "normality_passed": concentration.passed,
        "data": path.name,
    }
