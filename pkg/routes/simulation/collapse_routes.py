import numpy as np
from pydantic import Field, model_validator

from models.simulation.simulation_models import SigmaCSource
from routes.run_options import IntList, add_run_arguments
from routes.simulation.surface_routes import ModelRequest, add_model_arguments
from services import plot_scripts
from services.output_writer import OutputWriter
from services.simulation import DEFAULT_POINT_REPS, scaling_collapse


class CollapseRequest(ModelRequest):
    n: IntList
    z_min: float = -3.0
    z_max: float = 3.0
    z_points: int = Field(default=25, ge=2)
    sigma_c_source: SigmaCSource = SigmaCSource.CLOSED_FORM

    @model_validator(mode="after")
    def validate_z_range(self):
        if not self.z_max > self.z_min:
            raise ValueError("z_max must exceed z_min")
        return self


def register(subparsers) -> None:
    parser = subparsers.add_parser("collapse", help="acceptance probability against the scaled distance z")
    parser.add_argument("--n", default="64,128,256", help="comma-separated sample sizes")
    parser.add_argument("--z-min", type=float, default=-3.0, help="lowest scaled distance z")
    parser.add_argument("--z-max", type=float, default=3.0, help="highest scaled distance z")
    parser.add_argument("--z-points", type=int, default=25, help="evenly spaced z values, endpoints included")
    parser.add_argument(
        "--sigma-c-source",
        choices=[s.value for s in SigmaCSource],
        default=SigmaCSource.CLOSED_FORM.value,
        help="dispersion used to map z to true capability",
    )
    add_model_arguments(parser)
    add_run_arguments(parser, default_reps=DEFAULT_POINT_REPS)
    parser.set_defaults(handler=handle, request_model=CollapseRequest)


def handle(request: CollapseRequest, out: OutputWriter) -> dict:
    z_grid = [float(z) for z in np.round(np.linspace(request.z_min, request.z_max, request.z_points), 10)]
    collapse = scaling_collapse(
        z_grid,
        request.n,
        request.c0,
        request.reps,
        request.sigma_c_source,
        request.seed_path(),
        config=request.config(),
        threads=request.threads,
    )
    rows = [p.model_dump() for p in collapse.points]
    path = out.write_data("collapse", collapse, rows)
    if request.gnuplot_script:
        out.write_text("collapse.gp", plot_scripts.render("collapse", "collapse", path.name))

    residuals = {str(n): collapse.max_abs_residual(n) for n in request.n if any(p.n == n for p in collapse.points)}
    return {
        "command": "collapse",
        "points": len(collapse.points),
        "skipped": len(collapse.skipped),
        "max_abs_residual": residuals,
        "data": path.name,
    }
