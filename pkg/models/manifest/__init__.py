"""models.manifest package"""

__all__ = [
    "manifest_models",
]
