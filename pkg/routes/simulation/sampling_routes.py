from routes.run_options import IntList, add_run_arguments
from routes.simulation.surface_routes import ModelRequest, add_model_arguments
from services import plot_scripts
from services.output_writer import OutputWriter
from services.simulation import DEFAULT_POINT_REPS, sampling_distribution


class SamplingRequest(ModelRequest):
    cpk_true: float
    n: IntList


def register(subparsers) -> None:
    parser = subparsers.add_parser("sampling", help="sampling distributions of the estimate for several n")
    parser.add_argument("--cpk-true", type=float, default=1.33, help="true capability of the simulated process")
    parser.add_argument("--n", default="16,32,64,128", help="comma-separated sample sizes")
    add_model_arguments(parser)
    add_run_arguments(parser, default_reps=DEFAULT_POINT_REPS)
    parser.set_defaults(handler=handle, request_model=SamplingRequest)


def handle(request: SamplingRequest, out: OutputWriter) -> dict:
    dist = sampling_distribution(
        request.cpk_true,
        request.n,
        request.c0,
        request.reps,
        request.seed_path(),
        config=request.config(),
    )
    edges = dist.bin_edges
    rows = [
        {"n": h.n, "bin_lo": edges[k], "bin_hi": edges[k + 1], "count": count, "mass": h.mass[k]}
        for h in dist.histograms
        for k, count in enumerate(h.counts)
    ]
    path = out.write_data("sampling", dist, rows)
    if request.gnuplot_script:
        n_values = " ".join(str(n) for n in request.n)
        out.write_text("sampling.gp", plot_scripts.render("sampling", "sampling", path.name, n_values=n_values))
    return {
        "command": "sampling",
        "bins": len(edges) - 1,
        "tail_below_c0": {str(h.n): h.tail_below_c0 for h in dist.histograms},
        "data": path.name,
    }
