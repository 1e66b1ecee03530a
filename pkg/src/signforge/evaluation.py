"""Benchmark protocols: top-k recognition accuracy and spotting mAP."""

from __future__ import annotations

import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from signforge import kernels
from signforge.core import PipelineConfig, SpottedSign, TimeInterval, ValidationError
from signforge.dataset import Annotation
from signforge.subtitles import WordOccurrence

logger = logging.getLogger(__name__)

# Episodes are laid out end to end on one axis, this far apart, so one
# matching pass can never pair a detection with a positive from another
# episode (their IoU is zero).
_EPISODE_SPACING_S = 1e7


@dataclass(frozen=True)
class DetectionPrediction:
    episode_id: str
    word: str
    interval: TimeInterval
    score: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.score):
            raise ValidationError(f"detection score must be finite, got {self.score}")


@dataclass
class SpottingGroundTruth:
    """Positives, exclusion zones, and per-word eligible episodes."""

    positives: dict[tuple[str, str], list[TimeInterval]] = field(default_factory=dict)
    exclusion_zones: dict[tuple[str, str], list[TimeInterval]] = field(default_factory=dict)
    eligible_episodes: dict[str, set[str]] = field(default_factory=dict)


def topk_accuracy(
    gt: list[Annotation],
    predictions: dict[str, list[str]],
    k: int,
) -> tuple[float, float]:
    """Per-instance and per-class top-k accuracy.

    Per-instance averages over annotations; per-class averages each
    class's own accuracy, weighting rare and frequent words equally.
    Annotations without a prediction count as wrong.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if not gt:
        raise ValidationError("no ground-truth annotations to score")
    hits = 0
    per_class: dict[str, list[int]] = defaultdict(list)
    missing = 0
    for a in gt:
        ranked = predictions.get(a.id)
        if ranked is None:
            missing += 1
            hit = 0
        else:
            hit = int(a.word in ranked[:k])
        hits += hit
        per_class[a.word].append(hit)
    if missing:
        logger.warning("%d of %d annotations have no prediction; counted wrong", missing, len(gt))
    per_instance = hits / len(gt)
    class_means = [sum(v) / len(v) for v in per_class.values()]
    return per_instance, sum(class_means) / len(class_means)


def detected_occurrences(
    detections: list[SpottedSign],
    index: dict[str, list[WordOccurrence]],
    cfg: PipelineConfig,
) -> set[tuple[str, str, int]]:
    """Subtitle occurrences the pipeline explained with a detection.

    An occurrence counts as detected when some detection of the same
    (episode, word) has its peak inside the occurrence's padded search
    window. Returns (episode_id, word, subtitle_index) triples.
    """
    peaks: dict[tuple[str, str], list[float]] = defaultdict(list)
    for d in detections:
        peaks[(d.episode_id, d.word)].append(d.peak_time)
    found = set()
    for word, occs in index.items():
        for occ in occs:
            lo = occ.interval.start - cfg.pad_seconds
            hi = occ.interval.end + cfg.pad_seconds
            for peak in peaks.get((occ.episode_id, word), ()):
                if lo <= peak <= hi:
                    found.add((occ.episode_id, word, occ.subtitle_index))
                    break
    return found


def build_spotting_gt(
    verified_test: list[Annotation],
    index: dict[str, list[WordOccurrence]],
    detections_made: set[tuple[str, str, int]],
    cfg: PipelineConfig,
) -> SpottingGroundTruth:
    """Assemble the spotting benchmark's ground truth.

    Positives are fixed-length windows centred on each verified
    instance. For every subtitle occurrence of an evaluated word that
    the automatic pipeline did not explain, footage around the subtitle
    midpoint becomes an exclusion zone so a spotter is not penalized
    for finding signs the annotation stage missed.
    """
    gt = SpottingGroundTruth()
    half = cfg.sign_window_seconds / 2.0
    for a in verified_test:
        c = a.interval.centre()
        pos = TimeInterval(max(0.0, c - half), c + half)
        gt.positives.setdefault((a.episode_id, a.word), []).append(pos)
        gt.eligible_episodes.setdefault(a.word, set()).add(a.episode_id)
    zone_half = cfg.exclusion_window_seconds / 2.0
    for word, episodes in gt.eligible_episodes.items():
        for occ in index.get(word, []):
            if occ.episode_id not in episodes:
                continue
            if (occ.episode_id, word, occ.subtitle_index) in detections_made:
                continue
            m = occ.interval.centre()
            zone = TimeInterval(max(0.0, m - zone_half), m + zone_half)
            gt.exclusion_zones.setdefault((occ.episode_id, word), []).append(zone)
    return gt


def average_precision(
    positives: list[TimeInterval],
    detections: list[tuple[float, TimeInterval]],
    exclusion_zones: list[TimeInterval],
    iou_threshold: float,
) -> float:
    """Non-interpolated AP for one class.

    Detections whose centre falls in an exclusion zone are discarded.
    The rest are ranked by score (ties: earlier interval) and matched
    greedily to the unmatched positive of highest overlap; a match
    counts only when IoU strictly exceeds the threshold, and duplicate
    hits on an already-matched positive are false positives.
    """
    if not positives:
        logger.warning("average_precision called with no positives; returning 0")
        return 0.0
    kept = [
        (score, interval)
        for score, interval in detections
        if not any(z.contains(interval.centre()) for z in exclusion_zones)
    ]
    if not kept:
        return 0.0
    kept.sort(key=lambda d: (-d[0], d[1].start, d[1].end))
    det_starts = np.array([i.start for _, i in kept])
    det_ends = np.array([i.end for _, i in kept])
    gt_starts = np.array([p.start for p in positives])
    gt_ends = np.array([p.end for p in positives])
    matched = kernels.greedy_match(det_starts, det_ends, gt_starts, gt_ends, iou_threshold)
    ap = 0.0
    tp = 0
    for rank, m in enumerate(matched, start=1):
        if m >= 0:
            tp += 1
            ap += (tp / rank) * (1.0 / len(positives))
    return ap


def _class_detections(
    gt: SpottingGroundTruth, detections: list[DetectionPrediction]
) -> dict[str, list[tuple[float, TimeInterval]]]:
    """Per-word scored intervals on the episode-spread time axis."""
    episode_offset: dict[str, float] = {}
    episode_ids = sorted({ep for (ep, _w) in gt.positives})
    for i, ep in enumerate(episode_ids):
        episode_offset[ep] = i * _EPISODE_SPACING_S
    out: dict[str, list[tuple[float, TimeInterval]]] = defaultdict(list)
    for d in detections:
        eligible = gt.eligible_episodes.get(d.word)
        if not eligible or d.episode_id not in eligible:
            continue
        zones = gt.exclusion_zones.get((d.episode_id, d.word), [])
        if any(z.contains(d.interval.centre()) for z in zones):
            continue
        off = episode_offset[d.episode_id]
        out[d.word].append(
            (d.score, TimeInterval(d.interval.start + off, d.interval.end + off))
        )
    return out


def per_class_ap(
    gt: SpottingGroundTruth,
    detections: list[DetectionPrediction],
    cfg: PipelineConfig,
) -> dict[str, float]:
    """AP per word over its eligible episodes; exclusions pre-applied."""
    episode_offset: dict[str, float] = {}
    episode_ids = sorted({ep for (ep, _w) in gt.positives})
    for i, ep in enumerate(episode_ids):
        episode_offset[ep] = i * _EPISODE_SPACING_S
    class_dets = _class_detections(gt, detections)
    result = {}
    for word in sorted(gt.eligible_episodes):
        positives = []
        for ep in sorted(gt.eligible_episodes[word]):
            off = episode_offset[ep]
            positives.extend(
                TimeInterval(p.start + off, p.end + off)
                for p in gt.positives.get((ep, word), [])
            )
        result[word] = average_precision(
            positives, class_dets.get(word, []), [], cfg.iou_threshold
        )
    return result


def spotting_map(
    gt: SpottingGroundTruth,
    detections: list[DetectionPrediction],
    cfg: PipelineConfig,
) -> float:
    """Unweighted mean AP over every word with at least one positive."""
    aps = per_class_ap(gt, detections, cfg)
    if not aps:
        return 0.0
    return sum(aps.values()) / len(aps)


def load_recognition_predictions(path: str | Path) -> dict[str, list[str]]:
    preds: dict[str, list[str]] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path} line {lineno}: invalid JSON ({exc})") from None
        ranked = list(rec["ranked_words"])
        if len(set(ranked)) != len(ranked):
            raise ValidationError(
                f"{path} line {lineno}: duplicate words in ranking for {rec['annotation_id']}"
            )
        preds[rec["annotation_id"]] = ranked
    return preds


def load_spotting_predictions(path: str | Path) -> list[DetectionPrediction]:
    preds = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path} line {lineno}: invalid JSON ({exc})") from None
        preds.append(
            DetectionPrediction(
                episode_id=rec["episode_id"],
                word=rec["word"],
                interval=TimeInterval(float(rec["start_s"]), float(rec["end_s"])),
                score=float(rec["score"]),
            )
        )
    return preds
