"""models.decision package"""

__all__ = [
    "decision_models",
]
