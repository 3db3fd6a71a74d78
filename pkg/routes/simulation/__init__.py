"""routes.simulation package"""

__all__ = [
    "collapse_routes",
    "rules_routes",
    "sampling_routes",
    "surface_routes",
]
