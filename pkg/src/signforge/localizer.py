"""Candidate-window proposal and posterior-peak localization with NMS."""

from __future__ import annotations

import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from signforge import kernels
from signforge.core import (
    PipelineConfig,
    SpottedSign,
    TimeInterval,
    ValidationError,
    pad_interval,
)
from signforge.subtitles import EpisodeMeta, WordOccurrence
from signforge.vocab import Vocabulary

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CandidateWindow:
    """A padded search window around one subtitle occurrence of a word."""

    id: str
    word: str
    episode_id: str
    interval: TimeInterval
    source_subtitle_index: int
    clamped: bool = False


@dataclass(frozen=True)
class PosteriorStream:
    """Per-frame keyword probabilities over one candidate window.

    Sample k sits at ``window_start + k * stride``.
    """

    window_id: str
    word: str
    episode_id: str
    window_start: float
    stride: float
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.stride > 0:
            raise ValidationError(f"stream {self.window_id}: stride must be > 0")
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.size == 0:
            raise ValidationError(f"stream {self.window_id}: values must be non-empty")
        if not ((arr >= 0.0) & (arr <= 1.0)).all():
            raise ValidationError(f"stream {self.window_id}: values must lie in [0, 1]")

    def time_of(self, k: int) -> float:
        return self.window_start + k * self.stride


def propose_windows(
    vocab: Vocabulary,
    index: dict[str, list[WordOccurrence]],
    episodes: dict[str, EpisodeMeta],
    cfg: PipelineConfig,
) -> list[CandidateWindow]:
    """One padded window per (vocabulary word, subtitle occurrence).

    Words absent from the index yield no windows. Window ids encode
    (episode, cue, occurrence ordinal, word) and are treated as opaque
    downstream.
    """
    windows: list[CandidateWindow] = []
    seen_ids: set[str] = set()
    for word in sorted(vocab):
        per_cue: dict[tuple[str, int], int] = defaultdict(int)
        for occ in index.get(word, []):
            meta = episodes.get(occ.episode_id)
            if meta is None:
                raise ValidationError(
                    f"occurrence of {word!r} references unknown episode {occ.episode_id!r}"
                )
            ordinal = per_cue[(occ.episode_id, occ.subtitle_index)]
            per_cue[(occ.episode_id, occ.subtitle_index)] += 1
            wid = f"{occ.episode_id}:{occ.subtitle_index}:{ordinal}:{word}"
            if wid in seen_ids:
                raise ValidationError(f"window id collision: {wid!r}")
            seen_ids.add(wid)
            padded = pad_interval(occ.interval, cfg.pad_seconds, meta.duration)
            clamped = (
                occ.interval.start - cfg.pad_seconds < 0
                or occ.interval.end + cfg.pad_seconds > meta.duration
            )
            windows.append(
                CandidateWindow(
                    id=wid,
                    word=word,
                    episode_id=occ.episode_id,
                    interval=padded,
                    source_subtitle_index=occ.subtitle_index,
                    clamped=clamped,
                )
            )
    return windows


def localize(
    stream: PosteriorStream,
    cfg: PipelineConfig,
    episode_duration: float | None = None,
) -> SpottedSign | None:
    """Anchor a sign window at the stream's peak posterior.

    Returns None when the peak is below the mouthing threshold or the
    anchored window would be degenerate. The earliest sample wins ties.
    """
    if not math.isclose(stream.stride, cfg.stride_seconds, rel_tol=1e-9, abs_tol=1e-12):
        logger.warning(
            "stream %s has stride %g, config expects %g; using the stream's stride",
            stream.window_id,
            stream.stride,
            cfg.stride_seconds,
        )
    k, peak_value = kernels.first_argmax(stream.values)
    if peak_value < cfg.mouthing_threshold:
        return None
    peak_time = stream.time_of(k)
    if episode_duration is not None and peak_time > episode_duration:
        logger.warning(
            "stream %s peaks at %.3f s, beyond the %.3f s episode; dropped",
            stream.window_id,
            peak_time,
            episode_duration,
        )
        return None
    start = peak_time - cfg.sign_window_seconds
    truncated = start < 0
    start = max(0.0, start)
    if start >= peak_time:
        logger.warning(
            "stream %s peaks at %.3f s, too early for a %g s sign window; dropped",
            stream.window_id,
            peak_time,
            cfg.sign_window_seconds,
        )
        return None
    return SpottedSign(
        word=stream.word,
        episode_id=stream.episode_id,
        peak_time=peak_time,
        confidence=peak_value,
        interval=TimeInterval(start, peak_time),
        truncated=truncated,
        window_id=stream.window_id,
    )


def nms(detections: list[SpottedSign], cfg: PipelineConfig) -> list[SpottedSign]:
    """Greedy temporal deduplication per (episode, word).

    Detections are visited by confidence (ties: earlier peak, then
    window id); one is kept iff its peak lies at least the NMS window
    away from every kept peak of its group. Output is peak-time ordered.
    """
    groups: dict[tuple[str, str], list[SpottedSign]] = defaultdict(list)
    for det in detections:
        groups[(det.episode_id, det.word)].append(det)
    kept: list[SpottedSign] = []
    for key in sorted(groups):
        group = sorted(groups[key], key=lambda d: (-d.confidence, d.peak_time, d.window_id))
        peaks = np.array([d.peak_time for d in group], dtype=np.float64)
        mask = kernels.nms_keep(peaks, cfg.nms_window_seconds)
        kept.extend(d for d, keep in zip(group, mask) if keep)
    kept.sort(key=lambda d: (d.episode_id, d.peak_time, d.word, d.window_id))
    return kept


def run_pipeline(
    corpus,
    vocab: Vocabulary,
    streams: list[PosteriorStream],
    cfg: PipelineConfig,
) -> list[SpottedSign]:
    """Propose windows, localize every stream, and deduplicate."""
    windows = propose_windows(vocab, corpus.index(), corpus.episodes, cfg)
    by_id = {w.id: w for w in windows}
    detections: list[SpottedSign] = []
    for stream in streams:
        window = by_id.get(stream.window_id)
        if window is None:
            raise ValidationError(f"stream references unknown window {stream.window_id!r}")
        if stream.word != window.word or stream.episode_id != window.episode_id:
            raise ValidationError(
                f"stream {stream.window_id!r} disagrees with its window on word/episode"
            )
        det = localize(stream, cfg, corpus.episodes[window.episode_id].duration)
        if det is not None:
            detections.append(det)
    return nms(detections, cfg)


def save_windows(windows: list[CandidateWindow], path: str | Path) -> None:
    lines = []
    for w in windows:
        lines.append(
            json.dumps(
                {
                    "id": w.id,
                    "word": w.word,
                    "episode_id": w.episode_id,
                    "start_s": w.interval.start,
                    "end_s": w.interval.end,
                    "source_subtitle_index": w.source_subtitle_index,
                    "clamped": w.clamped,
                }
            )
        )
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_windows(path: str | Path) -> list[CandidateWindow]:
    windows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        windows.append(
            CandidateWindow(
                id=rec["id"],
                word=rec["word"],
                episode_id=rec["episode_id"],
                interval=TimeInterval(float(rec["start_s"]), float(rec["end_s"])),
                source_subtitle_index=int(rec["source_subtitle_index"]),
                clamped=bool(rec.get("clamped", False)),
            )
        )
    return windows


def save_streams(streams: list[PosteriorStream], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for s in streams:
            fh.write(
                json.dumps(
                    {
                        "window_id": s.window_id,
                        "word": s.word,
                        "episode_id": s.episode_id,
                        "window_start_s": s.window_start,
                        "stride_s": s.stride,
                        "posteriors": list(s.values),
                    }
                )
            )
            fh.write("\n")


def load_streams(path: str | Path) -> list[PosteriorStream]:
    streams = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path} line {lineno}: invalid JSON ({exc})") from None
            streams.append(
                PosteriorStream(
                    window_id=rec["window_id"],
                    word=rec["word"],
                    episode_id=rec["episode_id"],
                    window_start=float(rec["window_start_s"]),
                    stride=float(rec["stride_s"]),
                    values=tuple(float(v) for v in rec["posteriors"]),
                )
            )
    return streams


def save_detections(detections: list[SpottedSign], path: str | Path) -> None:
    lines = []
    for d in detections:
        lines.append(
            json.dumps(
                {
                    "word": d.word,
                    "episode_id": d.episode_id,
                    "peak_time_s": d.peak_time,
                    "confidence": d.confidence,
                    "start_s": d.interval.start,
                    "end_s": d.interval.end,
                    "truncated": d.truncated,
                }
            )
        )
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_detections(path: str | Path) -> list[SpottedSign]:
    detections = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path} line {lineno}: invalid JSON ({exc})") from None
        detections.append(
            SpottedSign(
                word=rec["word"],
                episode_id=rec["episode_id"],
                peak_time=float(rec["peak_time_s"]),
                confidence=float(rec["confidence"]),
                interval=TimeInterval(float(rec["start_s"]), float(rec["end_s"])),
                truncated=bool(rec.get("truncated", False)),
            )
        )
    return detections
