import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from models.process.process_models import SeedPath  # noqa: E402


@pytest.fixture
def seed():
    return SeedPath(base=20240601)


@pytest.fixture
def three_dimension_csv(tmp_path):
    path = tmp_path / "dims.csv"
    path.write_text(
        "dimension_id,lsl,usl,nominal,value\n"
        "A,4,16,10,9\n"
        "A,4,16,10,10\n"
        "A,4,16,10,11\n"
        "B,-inf,5,,1.0\n"
        "B,-inf,5,,1.5\n"
        "B,-inf,5,,0.5\n"
        "B,-inf,5,,1.2\n"
        "C,0,1,0.5,0.40\n"
        "C,0,1,0.5,0.55\n"
        "C,0,1,0.5,0.52\n"
        "C,0,1,0.5,0.47\n",
        encoding="utf-8",
    )
    return path
