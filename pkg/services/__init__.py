"""services package"""

__all__ = [
    "asymptotics",
    "capability_core",
    "dataset_io",
    "decision_rules",
    "errors",
    "output_writer",
    "plot_scripts",
    "resampling",
    "rng_distributions",
    "simulation",
    "worker_pool",
]
