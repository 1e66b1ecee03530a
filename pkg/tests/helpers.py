"""Small builders shared across test modules."""

from __future__ import annotations

import numpy as np

from signforge.core import PipelineConfig, TimeInterval, load_default_config
from signforge.dataset import Annotation, DatasetManifest
from signforge.subtitles import EpisodeMeta, SubtitleEntry

DEFAULT_CFG = load_default_config()


def meta(
    episode_id: str = "ep1",
    duration: float = 3600.0,
    signer: str = "sig1",
    status: str = "hearing",
) -> EpisodeMeta:
    return EpisodeMeta(
        episode_id=episode_id,
        show_name="show",
        duration=duration,
        signer_id=signer,
        hearing_status=status,
    )


def cue(episode_id: str, index: int, start: float, end: float, text: str) -> SubtitleEntry:
    return SubtitleEntry(episode_id, index, TimeInterval(start, end), text)


def annotation(
    aid: str,
    word: str,
    episode_id: str = "ep1",
    signer: str = "sig1",
    peak: float = 100.0,
    confidence: float = 0.9,
    split: str = "",
) -> Annotation:
    return Annotation(
        id=aid,
        word=word,
        episode_id=episode_id,
        signer_id=signer,
        interval=TimeInterval(peak - 0.6, peak),
        clip_interval=TimeInterval(peak - 0.8, peak),
        confidence=confidence,
        split=split,
    )


def manifest(
    annotations: list[Annotation],
    vocabulary: tuple[str, ...] | None = None,
    split_spec: dict[str, str] | None = None,
    cfg: PipelineConfig | None = None,
) -> DatasetManifest:
    if vocabulary is None:
        vocabulary = tuple(sorted({a.word for a in annotations}))
    if split_spec is None:
        split_spec = {}
        for a in annotations:
            split_spec.setdefault(a.signer_id, a.split or "train")
    return DatasetManifest(
        vocabulary=vocabulary,
        annotations=annotations,
        split_spec=split_spec,
        config=cfg or DEFAULT_CFG,
    )


def random_ap_case(rng: np.random.Generator):
    """Positives (non-overlapping 0.6 s windows) plus ranked-ish detections."""
    n_pos = int(rng.integers(1, 4))
    starts = []
    t = float(rng.uniform(0.0, 2.0))
    for _ in range(n_pos):
        starts.append(t)
        t += 0.6 + float(rng.uniform(0.0, 2.0))
    positives = [(s, s + 0.6) for s in starts]
    detections = []
    for _ in range(int(rng.integers(0, 5))):
        if rng.random() < 0.7:
            base = starts[int(rng.integers(0, n_pos))]
            s = max(0.0, base + float(rng.uniform(-0.45, 0.45)))
        else:
            s = float(rng.uniform(0.0, t + 1.0))
        detections.append((float(rng.random()), (s, s + 0.6)))
    return positives, detections
