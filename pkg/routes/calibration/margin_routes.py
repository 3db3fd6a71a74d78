from typing import Optional

from pydantic import Field

from routes.run_options import RunRequest, add_run_arguments
from services.asymptotics import acceptance_prob_margin, calibrate_margin, instability_band, sigma_c_closed_form
from services.output_writer import OutputWriter


class MarginRequest(RunRequest):
    n: int = Field(ge=1)
    alpha: float = Field(default=0.05, gt=0, lt=1)
    sigma_c: Optional[float] = Field(default=None, gt=0)
    epsilon: float = Field(default=0.45, gt=0, lt=0.5)


def register(subparsers) -> None:
    parser = subparsers.add_parser("margin", help="guard band giving boundary acceptance alpha")
    parser.add_argument("--n", type=int, required=True, help="sample size")
    parser.add_argument("--alpha", type=float, default=0.05, help="target boundary acceptance")
    parser.add_argument("--sigma-c", type=float, default=None, help="estimator dispersion (default: closed form at c0)")
    parser.add_argument("--epsilon", type=float, default=0.45, help="instability band: |P(accept) - 1/2| <= epsilon")
    add_run_arguments(parser)
    parser.set_defaults(handler=handle, request_model=MarginRequest)


def handle(request: MarginRequest, out: OutputWriter) -> dict:
    sigma_c = request.sigma_c if request.sigma_c is not None else sigma_c_closed_form(request.c0)
    cal = calibrate_margin(request.c0, request.n, sigma_c, request.alpha)
    band = instability_band(request.c0, request.n, sigma_c, request.epsilon)
    result = {
        **cal.model_dump(),
        "boundary_acceptance": acceptance_prob_margin(request.c0, request.c0, request.n, sigma_c, cal.kappa),
        "band": band.model_dump(),
    }
    out.write_json("margin", result)
    return result
