"""Multi-precision mid-air pointing: engine, simulation and task metrics."""

from .engine import (
    Adjustment,
    ClutchParams,
    DisplayGeometry,
    FrameOutput,
    Mapping,
    MappedArea,
    PointerEngine,
    TechniqueConfig,
    default_config,
    default_volume,
)
from .geometry import CalibrationVolume, HandSample, Point3
from .precision import PrecisionScheme, SchemeKind

__all__ = [
    "Adjustment",
    "CalibrationVolume",
    "ClutchParams",
    "DisplayGeometry",
    "FrameOutput",
    "HandSample",
    "Mapping",
    "MappedArea",
    "Point3",
    "PointerEngine",
    "PrecisionScheme",
    "SchemeKind",
    "TechniqueConfig",
    "default_config",
    "default_volume",
]

__version__ = "0.1.0"
