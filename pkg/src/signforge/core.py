"""Shared domain types: time intervals, frame arithmetic, pipeline configuration."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from importlib import resources
from pathlib import Path


class ValidationError(ValueError):
    """An input violates a documented invariant."""


@dataclass(frozen=True)
class TimeInterval:
    """Half-bounded span of time in seconds, start < end."""

    start: float
    end: float

    def __post_init__(self) -> None:
        if self.start < 0:
            raise ValidationError(f"interval start must be >= 0, got {self.start}")
        if not self.end > self.start:
            raise ValidationError(
                f"interval must have positive duration, got [{self.start}, {self.end}]"
            )

    def duration(self) -> float:
        return self.end - self.start

    def centre(self) -> float:
        return 0.5 * (self.start + self.end)

    def contains(self, t: float) -> bool:
        return self.start <= t <= self.end


def iou(a: TimeInterval, b: TimeInterval) -> float:
    """Intersection-over-union of two intervals; 0.0 when disjoint."""
    inter = min(a.end, b.end) - max(a.start, b.start)
    if inter <= 0:
        return 0.0
    union = max(a.end, b.end) - min(a.start, b.start)
    return inter / union


def pad_interval(i: TimeInterval, pad: float, episode_duration: float) -> TimeInterval:
    """Extend an interval by `pad` seconds per side, clamped to [0, episode_duration]."""
    if pad < 0:
        raise ValidationError(f"pad must be >= 0, got {pad}")
    return TimeInterval(max(0.0, i.start - pad), min(episode_duration, i.end + pad))


@dataclass(frozen=True)
class FrameClock:
    """Time <-> frame-index conversion at a fixed frame rate."""

    fps: float = 25.0

    def __post_init__(self) -> None:
        if not self.fps > 0:
            raise ValidationError(f"fps must be positive, got {self.fps}")

    def time_of(self, frame: int) -> float:
        return frame / self.fps

    def frame_of(self, t: float) -> int:
        return int(round(t * self.fps))


@dataclass(frozen=True)
class SpottedSign:
    """A localized sign detection anchored at a posterior peak.

    The sign window ends at the peak; `truncated` marks windows clamped at
    the episode start (shorter than the nominal window length).
    """

    word: str
    episode_id: str
    peak_time: float
    confidence: float
    interval: TimeInterval
    truncated: bool = False
    # provenance of the posterior stream; used only as a deterministic tie-break
    window_id: str = ""

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"confidence must be in [0, 1], got {self.confidence}")
        if self.interval.end != self.peak_time:
            raise ValidationError(
                f"sign window must end at the peak: end={self.interval.end}, "
                f"peak={self.peak_time}"
            )


_THRESHOLD_FIELDS = (
    "mouthing_threshold",
    "high_confidence_threshold",
    "verification_queue_threshold",
    "iou_threshold",
)
_POSITIVE_FIELDS = (
    "stride_seconds",
    "sign_window_seconds",
    "nms_window_seconds",
    "exclusion_window_seconds",
    "fps",
)


@dataclass(frozen=True)
class PipelineConfig:
    """All tunables of the annotation pipeline and evaluation protocols."""

    pad_seconds: float = 4.0
    stride_seconds: float = 0.04
    sign_window_seconds: float = 0.6
    mouthing_threshold: float = 0.5
    high_confidence_threshold: float = 0.8
    verification_queue_threshold: float = 0.9
    nms_window_seconds: float = 0.6
    exclusion_window_seconds: float = 8.0
    iou_threshold: float = 0.5
    fps: float = 25.0
    frames_before_peak: int = 20

    def __post_init__(self) -> None:
        for name in _THRESHOLD_FIELDS:
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1], got {v}")
        for name in _POSITIVE_FIELDS:
            v = getattr(self, name)
            if not v > 0:
                raise ValidationError(f"{name} must be positive, got {v}")
        if self.pad_seconds < 0:
            raise ValidationError(f"pad_seconds must be >= 0, got {self.pad_seconds}")
        if self.frames_before_peak < 1:
            raise ValidationError(
                f"frames_before_peak must be >= 1, got {self.frames_before_peak}"
            )
        if not (
            self.mouthing_threshold
            <= self.high_confidence_threshold
            <= self.verification_queue_threshold
        ):
            raise ValidationError(
                "thresholds must satisfy mouthing <= high_confidence <= verification_queue"
            )

    @property
    def clock(self) -> FrameClock:
        return FrameClock(self.fps)

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def parse_config_text(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    """Parse the flat ``key = value`` config format (``#`` starts a comment).

    Keys not present keep the values of `base` (the defaults when omitted).
    """
    values = _parse_keyvalue_text(text, {f.name for f in dataclasses.fields(PipelineConfig)})
    merged = dataclasses.asdict(base or PipelineConfig())
    merged.update(values)
    merged["frames_before_peak"] = int(merged["frames_before_peak"])
    return PipelineConfig(**merged)


def _parse_keyvalue_text(text: str, known_keys: set[str]) -> dict[str, float]:
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in known_keys:
            raise ValidationError(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = float(value.strip())
        except ValueError:
            raise ValidationError(
                f"config line {lineno}: {key} is not a number: {value.strip()!r}"
            ) from None
    return values


def load_config(path: str | Path) -> PipelineConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def save_config(cfg: PipelineConfig, path: str | Path) -> None:
    lines = [f"{k} = {v}" for k, v in cfg.to_dict().items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def default_config_path() -> Path:
    """Path of the default config shipped with the package."""
    return Path(str(resources.files("signforge").joinpath("data", "default.cfg")))


def load_default_config() -> PipelineConfig:
    return load_config(default_config_path())
