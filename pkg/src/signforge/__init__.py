"""Subtitle-driven sign annotation toolkit: localization, datasets, benchmarks."""

from signforge.core import (
    FrameClock,
    PipelineConfig,
    SpottedSign,
    TimeInterval,
    ValidationError,
    iou,
    load_config,
    load_default_config,
    pad_interval,
)

__version__ = "0.1.0"

__all__ = [
    "FrameClock",
    "PipelineConfig",
    "SpottedSign",
    "TimeInterval",
    "ValidationError",
    "iou",
    "load_config",
    "load_default_config",
    "pad_interval",
    "__version__",
]
