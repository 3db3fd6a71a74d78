"""models.simulation package"""

__all__ = [
    "simulation_models",
]
