"""models.process package"""

__all__ = [
    "process_models",
]
