from typing import Annotated, List, Optional

from pydantic import BeforeValidator, Field

from models.decision.decision_models import DecisionRuleSpec, ProbabilityMethod, RuleKind
from routes.run_options import IntList, add_run_arguments, linear_grid, split_list
from routes.simulation.surface_routes import ModelRequest, add_model_arguments
from services import plot_scripts
from services.output_writer import OutputWriter
from services.simulation import DEFAULT_CELL_REPS, acceptance_boundary, rule_acceptance_surface


class RulesRequest(ModelRequest):
    rules: Annotated[List[RuleKind], BeforeValidator(split_list)]
    cpk_min: float
    cpk_max: float
    cpk_step: float
    n: IntList
    alpha: float = Field(default=0.05, gt=0, lt=1)
    p_min: float = Field(default=0.95, gt=0, lt=1)
    prob_method: ProbabilityMethod = ProbabilityMethod.PLUG_IN_ASYMPTOTIC
    inner_reps: int = 2000
    sigma_c: Optional[float] = Field(default=None, gt=0)

    def rule_specs(self) -> List[DecisionRuleSpec]:
        return [
            DecisionRuleSpec(
                kind=kind,
                c0=self.c0,
                alpha=self.alpha,
                p_min=self.p_min,
                prob_method=self.prob_method,
                inner_reps=self.inner_reps,
                sigma_c=self.sigma_c,
            )
            for kind in self.rules
        ]


def register(subparsers) -> None:
    parser = subparsers.add_parser("rules", help="acceptance curves of the approval rules")
    parser.add_argument(
        "--rules", default="deterministic,lcb,probability", help="comma-separated: deterministic, margin, lcb, probability"
    )
    parser.add_argument("--cpk-min", type=float, default=1.0, help="first true capability of the grid")
    parser.add_argument("--cpk-max", type=float, default=2.0, help="last true capability of the grid (inclusive)")
    parser.add_argument("--cpk-step", type=float, default=0.02, help="grid spacing")
    parser.add_argument("--n", default="32,128,2000", help="comma-separated sample sizes")
    parser.add_argument("--alpha", type=float, default=0.05, help="lcb and margin rules")
    parser.add_argument("--p-min", type=float, default=0.95, help="probability rule")
    parser.add_argument(
        "--prob-method",
        choices=[m.value for m in ProbabilityMethod],
        default=ProbabilityMethod.PLUG_IN_ASYMPTOTIC.value,
        help="probability rule: plug-in asymptotic or nested Monte Carlo",
    )
    parser.add_argument("--inner-reps", type=int, default=2000, help="nested Monte Carlo inner samples")
    parser.add_argument("--sigma-c", type=float, default=None, help="margin rule dispersion (default: closed form)")
    add_model_arguments(parser)
    add_run_arguments(parser, default_reps=DEFAULT_CELL_REPS)
    parser.set_defaults(handler=handle, request_model=RulesRequest)


def handle(request: RulesRequest, out: OutputWriter) -> dict:
    cpk_grid = linear_grid(request.cpk_min, request.cpk_max, request.cpk_step)
    config = request.config()
    rows, boundaries = [], {}
    for rule in request.rule_specs():
        surface = rule_acceptance_surface(
            rule, cpk_grid, request.n, request.reps, config, request.seed_path(), threads=request.threads
        )
        for i, cpk_true in enumerate(surface.cpk_grid):
            for j, n in enumerate(surface.n_grid):
                rows.append(
                    {"rule": rule.kind, "cpk_true": cpk_true, "n": n, "acceptance": surface.acceptance[i][j]}
                )
        boundaries[rule.kind.value] = {
            str(b.n): b.cpk_true for b in acceptance_boundary(surface, 0.5)
        }

    payload = {"c0": request.c0, "cpk_grid": cpk_grid, "n_grid": request.n, "rows": rows, "boundaries": boundaries}
    path = out.write_data("rules", payload, rows)
    if request.gnuplot_script:
        label = ",".join(r.value for r in request.rules)
        out.write_text("rules.gp", plot_scripts.render("rules", "rules", path.name, rule=label))
    return {"command": "rules", "boundaries": boundaries, "data": path.name}
