import argparse

from models.process.process_models import ProcessFamily
from models.simulation.simulation_models import CalibrationMode, EstimatorKind, SimulationConfig
from routes.run_options import IntList, RunRequest, add_run_arguments, linear_grid
from services import plot_scripts
from services.output_writer import OutputWriter
from services.simulation import DEFAULT_CELL_REPS, risk_surface


class ModelRequest(RunRequest):
    """Sampling model, calibration mode and estimator flags."""

    centered: bool = False
    family: ProcessFamily = ProcessFamily.NORMAL
    estimator: EstimatorKind = EstimatorKind.CPK
    log_sigma: float = 0.25

    def config(self) -> SimulationConfig:
        mode = CalibrationMode.CENTERED if self.centered else CalibrationMode.ONE_SIDED
        return SimulationConfig(
            family=self.family, calibration_mode=mode, estimator=self.estimator, log_sigma=self.log_sigma
        )


class SurfaceRequest(ModelRequest):
    cpk_min: float
    cpk_max: float
    cpk_step: float
    n: IntList


def add_model_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--centered", action="store_true", help="both specification sides attain the target")
    parser.add_argument(
        "--family",
        choices=[f.value for f in ProcessFamily],
        default=ProcessFamily.NORMAL.value,
        help="distribution of the simulated measurements",
    )
    parser.add_argument(
        "--estimator",
        choices=[e.value for e in EstimatorKind],
        default=EstimatorKind.CPK.value,
        help="moment-based cpk or percentile-based cnpk",
    )
    parser.add_argument("--log-sigma", type=float, default=0.25, help="shape of the lognormal family")


def add_grid_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--cpk-min", type=float, default=1.13, help="first true capability of the grid")
    parser.add_argument("--cpk-max", type=float, default=1.53, help="last true capability of the grid (inclusive)")
    parser.add_argument("--cpk-step", type=float, default=0.02, help="grid spacing")
    parser.add_argument("--n", default="16,32,64,128", help="comma-separated sample sizes")


def register(subparsers) -> None:
    parser = subparsers.add_parser("surface", help="Monte Carlo misclassification surface over (cpk_true, n)")
    add_grid_arguments(parser)
    add_model_arguments(parser)
    add_run_arguments(parser, default_reps=DEFAULT_CELL_REPS)
    parser.set_defaults(handler=handle, request_model=SurfaceRequest)


def handle(request: SurfaceRequest, out: OutputWriter) -> dict:
    cpk_grid = linear_grid(request.cpk_min, request.cpk_max, request.cpk_step)
    surface = risk_surface(
        cpk_grid,
        request.n,
        request.c0,
        request.reps,
        request.config(),
        request.seed_path(),
        threads=request.threads,
    )
    rows = [
        {
            "cpk_true": cell.cpk_true,
            "n": cell.n,
            "p_accept": cell.p_accept,
            "misclass": cell.misclass,
            "misclass_type": cell.misclass_type,
            "mc_se": cell.mc_se,
        }
        for row in surface.cells
        for cell in row
    ]
    path = out.write_data("surface", surface, rows)
    if request.gnuplot_script:
        out.write_text("surface.gp", plot_scripts.render("surface", "surface", path.name))

    # Ridge: per n, the grid value with the largest misclassification.
    ridge = {}
    for j, n in enumerate(surface.n_grid):
        column = [row[j] for row in surface.cells]
        ridge[str(n)] = max(column, key=lambda c: c.misclass).cpk_true
    return {"command": "surface", "cells": len(rows), "ridge": ridge, "data": path.name}
