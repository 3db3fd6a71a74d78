"""routes package"""

__all__ = [
    "calibration",
    "dataset",
    "run_options",
    "simulation",
]
