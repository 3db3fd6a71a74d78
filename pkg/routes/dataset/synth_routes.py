from typing import Annotated, List

from pydantic import BeforeValidator

from models.dataset.dataset_models import SyntheticStratum
from routes.run_options import RunRequest, add_run_arguments
from services.dataset_io import generate_synthetic_dataset, write_dimensions
from services.output_writer import OutputWriter

STRATUM_FIELDS = ("true_cpk", "n", "count", "family", "calibration_mode")


def parse_strata(value):
    """``true_cpk:n:count[:family[:mode]]`` items separated by commas."""
    if not isinstance(value, str):
        return value
    strata = []
    for item in value.split(","):
        parts = [p.strip() for p in item.split(":")]
        if not 3 <= len(parts) <= len(STRATUM_FIELDS):
            raise ValueError(f"stratum {item!r} must be true_cpk:n:count[:family[:mode]]")
        strata.append(dict(zip(STRATUM_FIELDS, parts)))
    return strata


class SynthRequest(RunRequest):
    strata: Annotated[List[SyntheticStratum], BeforeValidator(parse_strata)]


def register(subparsers) -> None:
    parser = subparsers.add_parser("synth", help="generate a synthetic measurement dataset")
    parser.add_argument(
        "--strata",
        default="1.0:32:50,1.33:32:100,2.0:32:50",
        help="comma-separated true_cpk:n:count[:family[:mode]] blocks",
    )
    add_run_arguments(parser)
    parser.set_defaults(handler=handle, request_model=SynthRequest)


def handle(request: SynthRequest, out: OutputWriter) -> dict:
    records = generate_synthetic_dataset(request.strata, request.seed_path())
    path = out.write_file("dataset.csv", lambda p: write_dimensions(records, p))
    return {"command": "synth", "dimensions": len(records), "data": path.name}
