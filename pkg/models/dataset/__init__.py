"""models.dataset package"""

__all__ = [
    "dataset_models",
]
