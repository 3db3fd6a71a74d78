from pydantic import Field

from models.simulation.simulation_models import SigmaCSource
from routes.run_options import add_run_arguments
from routes.simulation.surface_routes import ModelRequest, add_model_arguments
from services.asymptotics import sigma_c_closed_form
from services.output_writer import OutputWriter
from services.simulation import DEFAULT_CELL_REPS, sigma_c_empirical


class SigmaCRequest(ModelRequest):
    cpk_true: float = Field(gt=0)
    n: int = Field(ge=4)
    source: SigmaCSource = SigmaCSource.CLOSED_FORM


def register(subparsers) -> None:
    parser = subparsers.add_parser("sigma-c", help="asymptotic dispersion of the estimator")
    parser.add_argument("--cpk-true", type=float, default=1.33, help="true capability of the simulated process")
    parser.add_argument("--n", type=int, default=32, help="sample size (empirical source)")
    parser.add_argument(
        "--source",
        choices=[s.value for s in SigmaCSource],
        default=SigmaCSource.CLOSED_FORM.value,
        help="closed-form dispersion or a Monte Carlo estimate at --n",
    )
    add_model_arguments(parser)
    add_run_arguments(parser, default_reps=DEFAULT_CELL_REPS)
    parser.set_defaults(handler=handle, request_model=SigmaCRequest)


def handle(request: SigmaCRequest, out: OutputWriter) -> dict:
    closed = sigma_c_closed_form(request.cpk_true)
    result = {"cpk_true": request.cpk_true, "n": request.n, "source": request.source, "closed_form": closed}
    if request.source == SigmaCSource.EMPIRICAL:
        empirical = sigma_c_empirical(
            request.cpk_true, request.n, request.config(), request.reps, request.seed_path().child("sigma_c")
        )
        result.update(sigma_c=empirical, relative_difference=empirical / closed - 1.0)
    else:
        result["sigma_c"] = closed
    out.write_json("sigma_c", result)
    return result
