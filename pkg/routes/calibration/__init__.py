"""routes.calibration package"""

__all__ = [
    "margin_routes",
    "sigma_c_routes",
]
