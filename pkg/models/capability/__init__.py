"""models.capability package"""

__all__ = [
    "capability_models",
]
