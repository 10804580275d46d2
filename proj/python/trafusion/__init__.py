"""Speed-field reconstruction from loop, FCD and Bluetooth data.

Speeds are m/s, positions m, times s. Fields are (n_x, n_t) arrays with
rows along the road and columns in time.
"""

from ._core import (
    KMH,
    ConfigError,
    DomainError,
    GridSpec,
    NoDataError,
    ParseError,
    SensorData,
    ShapeError,
    SpeedField,
    adaptive_weight,
    bt_weight,
    imae,
    infer_grid,
    load,
    parallelogram_area,
    reconstruct,
    simulate,
)

ALGORITHMS = ("secavg", "asm", "psm", "psmw")

__all__ = [
    "ALGORITHMS",
    "KMH",
    "ConfigError",
    "DomainError",
    "GridSpec",
    "NoDataError",
    "ParseError",
    "SensorData",
    "ShapeError",
    "SpeedField",
    "adaptive_weight",
    "bt_weight",
    "imae",
    "infer_grid",
    "load",
    "parallelogram_area",
    "reconstruct",
    "simulate",
]
