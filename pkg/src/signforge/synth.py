"""Synthetic corpora with known sign timelines, subtitles, and posteriors.

Everything is generated on a 25 fps frame grid so posterior samples land
exactly on true mouthing times and localization can be checked to the
frame. Words are assigned to sign slots by cycling a per-episode shuffled
permutation of the vocabulary, which keeps repeats of one word far apart
(at least ``vocab_size`` slots) so their search windows never collide.
"""

from __future__ import annotations

import dataclasses
import json
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from signforge.core import (
    PipelineConfig,
    SpottedSign,
    TimeInterval,
    ValidationError,
    _parse_keyvalue_text,
)
from signforge.localizer import CandidateWindow, PosteriorStream
from signforge.subtitles import Corpus, EpisodeMeta, SubtitleEntry, serialize_srt

GRID_FPS = 25
FRAME_S = 1.0 / GRID_FPS
SIGN_FRAMES = 15  # 0.6 s
CUE_FRAMES = 50  # 2.0 s
BASELINE = 0.05
BUMP_HEIGHT = 0.95


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_episodes: int = 4
    episode_duration_s: float = 1800.0
    vocab_size: int = 50
    signs_per_minute: float = 12.0
    mouthing_probability: float = 1.0
    subtitle_offset_range_s: float = 1.0
    bump_width_s: float = 0.3
    noise_level: float = 0.0
    n_signers: int = 4

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ValidationError(f"seed must be >= 0, got {self.seed}")
        for name in ("n_episodes", "vocab_size", "n_signers"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("episode_duration_s", "signs_per_minute", "bump_width_s"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be > 0, got {getattr(self, name)}")
        if not 0.0 <= self.mouthing_probability <= 1.0:
            raise ValidationError(
                f"mouthing_probability must be in [0, 1], got {self.mouthing_probability}"
            )
        if self.subtitle_offset_range_s < 0:
            raise ValidationError("subtitle_offset_range_s must be >= 0")
        if self.noise_level < 0:
            raise ValidationError("noise_level must be >= 0")

    def replace(self, **changes) -> "SynthConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_INT_FIELDS = ("seed", "n_episodes", "vocab_size", "n_signers")


def parse_synth_config_text(text: str, base: SynthConfig | None = None) -> SynthConfig:
    known = {f.name for f in dataclasses.fields(SynthConfig)}
    values = _parse_keyvalue_text(text, known)
    merged = dataclasses.asdict(base or SynthConfig())
    merged.update(values)
    for name in _INT_FIELDS:
        merged[name] = int(merged[name])
    return SynthConfig(**merged)


def load_synth_config(path: str | Path) -> SynthConfig:
    return parse_synth_config_text(Path(path).read_text(encoding="utf-8"))


def save_synth_config(cfg: SynthConfig, path: str | Path) -> None:
    lines = [f"{k} = {v}" for k, v in cfg.to_dict().items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class SynthSign:
    word: str
    interval: TimeInterval
    mouthed: bool
    mouthing_end: float | None

    def __post_init__(self) -> None:
        if self.mouthed:
            if self.mouthing_end is None or not self.interval.contains(self.mouthing_end):
                raise ValidationError("mouthing_end must lie inside the sign interval")


@dataclass
class GroundTruth:
    signs: dict[str, list[SynthSign]]
    signer_of: dict[str, str]

    def all_signs(self):
        for episode_id in sorted(self.signs):
            for sign in self.signs[episode_id]:
                yield episode_id, sign


@dataclass
class SynthCorpus:
    corpus: Corpus
    vocab: list[str]
    gt: GroundTruth
    config: SynthConfig


def _episode_rng(cfg: SynthConfig, episode_index: int) -> np.random.Generator:
    return np.random.default_rng(cfg.seed ^ episode_index)


def generate(cfg: SynthConfig) -> SynthCorpus:
    """Lay out signs, mouthings, and offset subtitle cues per episode.

    Signs are jittered inside equal slots and never overlap; every sign
    gets one subtitle cue at its start plus a uniform offset (in whole
    frames, within the configured range). Only mouthed signs later
    produce posterior bumps. Pure function of the config.
    """
    dur_frames = int(round(cfg.episode_duration_s * GRID_FPS))
    duration = dur_frames * FRAME_S
    n_signs = int(cfg.episode_duration_s / 60.0 * cfg.signs_per_minute)
    if n_signs < 1:
        raise ValidationError("configuration yields zero signs per episode")
    min_slot = dur_frames // n_signs
    if min_slot < SIGN_FRAMES:
        max_rate = 60.0 * GRID_FPS / SIGN_FRAMES
        raise ValidationError(
            f"signs_per_minute {cfg.signs_per_minute} too dense for "
            f"{SIGN_FRAMES / GRID_FPS} s signs (max {max_rate:.0f}/min)"
        )
    offset_frames = int(round(cfg.subtitle_offset_range_s * GRID_FPS))
    vocab = [f"word{k:03d}" for k in range(cfg.vocab_size)]

    episodes: dict[str, EpisodeMeta] = {}
    entries: list[SubtitleEntry] = []
    signs: dict[str, list[SynthSign]] = {}
    signer_of: dict[str, str] = {}
    for ep_idx in range(cfg.n_episodes):
        episode_id = f"synthep{ep_idx:03d}"
        signer_idx = ep_idx % cfg.n_signers
        signer = f"signer{signer_idx:02d}"
        status = "hearing" if signer_idx % 2 == 0 else "deaf"
        episodes[episode_id] = EpisodeMeta(
            episode_id=episode_id,
            show_name="synthetic",
            duration=duration,
            signer_id=signer,
            hearing_status=status,
        )
        signer_of[episode_id] = signer
        rng = _episode_rng(cfg, ep_idx)
        perm = rng.permutation(cfg.vocab_size)
        ep_signs: list[SynthSign] = []
        cues: list[tuple[int, int, str]] = []
        for s in range(n_signs):
            lo = s * dur_frames // n_signs
            hi = (s + 1) * dur_frames // n_signs
            start_f = int(rng.integers(lo, hi - SIGN_FRAMES + 1))
            word = vocab[int(perm[s % cfg.vocab_size])]
            mouthed = bool(rng.random() < cfg.mouthing_probability)
            interval = TimeInterval(start_f * FRAME_S, (start_f + SIGN_FRAMES) * FRAME_S)
            mouthing_end = interval.end if mouthed else None
            ep_signs.append(SynthSign(word, interval, mouthed, mouthing_end))
            off = int(rng.integers(-offset_frames, offset_frames + 1))
            cue_f = min(max(start_f + off, 0), dur_frames - CUE_FRAMES)
            cues.append((cue_f, s, word))
        cues.sort()
        for i, (cue_f, _s, word) in enumerate(cues, start=1):
            entries.append(
                SubtitleEntry(
                    episode_id=episode_id,
                    index=i,
                    interval=TimeInterval(cue_f * FRAME_S, (cue_f + CUE_FRAMES) * FRAME_S),
                    text=word,
                )
            )
        signs[episode_id] = ep_signs
    corpus = Corpus(episodes=episodes, entries=entries)
    return SynthCorpus(
        corpus=corpus, vocab=vocab, gt=GroundTruth(signs=signs, signer_of=signer_of), config=cfg
    )


def synth_posteriors(
    gt: GroundTruth,
    windows: list[CandidateWindow],
    synth_cfg: SynthConfig,
    pipeline_cfg: PipelineConfig,
) -> list[PosteriorStream]:
    """One posterior stream per candidate window.

    Streams carry clipped Gaussian noise around a low baseline, plus a
    triangular bump topping out at 1.0 at the mouthing end of every
    mouthed instance of the window's word that falls inside the window.
    """
    stride = pipeline_cfg.stride_seconds
    streams = []
    for w in windows:
        n = int(round(w.interval.duration() / stride)) + 1
        rng = np.random.default_rng([synth_cfg.seed, zlib.crc32(w.id.encode("utf-8"))])
        values = np.full(n, BASELINE)
        if synth_cfg.noise_level > 0:
            values = values + rng.normal(0.0, synth_cfg.noise_level, n)
        times = w.interval.start + np.arange(n) * stride
        half_bump = synth_cfg.bump_width_s / 2.0
        for sign in gt.signs.get(w.episode_id, []):
            if sign.word != w.word or not sign.mouthed:
                continue
            if not w.interval.contains(sign.mouthing_end):
                continue
            values = values + BUMP_HEIGHT * np.clip(
                1.0 - np.abs(times - sign.mouthing_end) / half_bump, 0.0, None
            )
        values = np.clip(values, 0.0, 1.0)
        streams.append(
            PosteriorStream(
                window_id=w.id,
                word=w.word,
                episode_id=w.episode_id,
                window_start=w.interval.start,
                stride=stride,
                values=tuple(float(v) for v in values),
            )
        )
    return streams


@dataclass
class SynthScore:
    recall: float
    precision: float
    recall_mouthed: float
    mean_abs_error_s: float
    max_frame_error: int
    n_signs: int
    n_mouthed: int
    n_detections: int
    n_matched: int

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def score_pipeline(
    detections: list[SpottedSign],
    gt: GroundTruth,
    tolerance_s: float = 0.5,
) -> SynthScore:
    """Match detections against true mouthing ends.

    A detection is correct when a same-word mouthed sign in its episode
    has a mouthing end within the tolerance; each true sign is consumed
    by at most one detection. `recall` is over all signs (mouthed or
    not), `recall_mouthed` over mouthed ones. Vacuous ratios are 1.0.
    """
    ends: dict[tuple[str, str], list[float]] = {}
    n_signs = 0
    n_mouthed = 0
    for episode_id, sign in gt.all_signs():
        n_signs += 1
        if sign.mouthed:
            n_mouthed += 1
            ends.setdefault((episode_id, sign.word), []).append(sign.mouthing_end)
    for lst in ends.values():
        lst.sort()
    matched_flags: dict[tuple[str, str], list[bool]] = {
        k: [False] * len(v) for k, v in ends.items()
    }
    n_matched = 0
    errors: list[float] = []
    frame_errors: list[int] = []
    for det in sorted(detections, key=lambda d: (d.episode_id, d.word, d.peak_time)):
        key = (det.episode_id, det.word)
        candidates = ends.get(key)
        if candidates is None:
            continue
        flags = matched_flags[key]
        best = -1
        best_dist = tolerance_s
        for i, m in enumerate(candidates):
            if flags[i]:
                continue
            dist = abs(det.peak_time - m)
            if dist <= best_dist and (best < 0 or dist < best_dist):
                best = i
                best_dist = dist
        if best >= 0:
            flags[best] = True
            n_matched += 1
            errors.append(best_dist)
            frame_errors.append(
                abs(
                    int(round(det.peak_time * GRID_FPS))
                    - int(round(candidates[best] * GRID_FPS))
                )
            )
    n_det = len(detections)
    return SynthScore(
        recall=n_matched / n_signs if n_signs else 1.0,
        precision=n_matched / n_det if n_det else 1.0,
        recall_mouthed=n_matched / n_mouthed if n_mouthed else 1.0,
        mean_abs_error_s=sum(errors) / len(errors) if errors else 0.0,
        max_frame_error=max(frame_errors) if frame_errors else 0,
        n_signs=n_signs,
        n_mouthed=n_mouthed,
        n_detections=n_det,
        n_matched=n_matched,
    )


def save_ground_truth(gt: GroundTruth, path: str | Path) -> None:
    lines = []
    for episode_id, sign in gt.all_signs():
        lines.append(
            json.dumps(
                {
                    "episode_id": episode_id,
                    "word": sign.word,
                    "start_s": sign.interval.start,
                    "end_s": sign.interval.end,
                    "mouthed": sign.mouthed,
                    "mouthing_end_s": sign.mouthing_end,
                }
            )
        )
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_ground_truth(
    path: str | Path, episodes: dict[str, EpisodeMeta] | None = None
) -> GroundTruth:
    signs: dict[str, list[SynthSign]] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        m = rec.get("mouthing_end_s")
        signs.setdefault(rec["episode_id"], []).append(
            SynthSign(
                word=rec["word"],
                interval=TimeInterval(float(rec["start_s"]), float(rec["end_s"])),
                mouthed=bool(rec["mouthed"]),
                mouthing_end=float(m) if m is not None else None,
            )
        )
    signer_of = {ep: meta.signer_id for ep, meta in (episodes or {}).items()}
    return GroundTruth(signs=signs, signer_of=signer_of)


def write_sandbox(
    world: SynthCorpus,
    streams: list[PosteriorStream],
    out_dir: str | Path,
) -> None:
    """Materialize a synthetic corpus in the pipeline's own file formats."""
    from signforge.localizer import save_streams
    from signforge.subtitles import save_corpus
    from signforge.vocab import save_word_list

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_corpus(world.corpus, out)
    srt_dir = out / "srt"
    srt_dir.mkdir(exist_ok=True)
    by_episode: dict[str, list[SubtitleEntry]] = {}
    for e in world.corpus.entries:
        by_episode.setdefault(e.episode_id, []).append(e)
    for episode_id in sorted(world.corpus.episodes):
        entries = sorted(by_episode.get(episode_id, []), key=lambda e: e.index)
        (srt_dir / f"{episode_id}.srt").write_text(serialize_srt(entries), encoding="utf-8")
    save_word_list(world.vocab, out / "vocab.txt")
    save_ground_truth(world.gt, out / "ground_truth.jsonl")
    save_streams(streams, out / "posteriors.jsonl")
    save_synth_config(world.config, out / "synth.cfg")
