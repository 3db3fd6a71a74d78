"""routes.dataset package"""

__all__ = [
    "bootstrap_routes",
    "estimate_routes",
    "synth_routes",
]
