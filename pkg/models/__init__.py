"""models package"""

__all__ = [
    "capability",
    "dataset",
    "decision",
    "manifest",
    "process",
    "simulation",
]
