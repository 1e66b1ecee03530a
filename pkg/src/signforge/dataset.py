"""Dataset manifests: clip extents, signer-disjoint splits, vocabulary filtering."""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, replace
from pathlib import Path

from signforge.core import PipelineConfig, SpottedSign, TimeInterval, ValidationError
from signforge.subtitles import EpisodeMeta

SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class Annotation:
    """One localized sign instance plus its training-clip extent.

    `interval` is the fixed-length sign window ending at the posterior
    peak; `clip_interval` is the longer training clip (a fixed number of
    frames before the peak), truncated and flagged at the episode start.
    """

    id: str
    word: str
    episode_id: str
    signer_id: str
    interval: TimeInterval
    clip_interval: TimeInterval
    confidence: float
    split: str = ""
    truncated: bool = False

    def __post_init__(self) -> None:
        if self.split not in ("",) + SPLITS:
            raise ValidationError(f"annotation {self.id}: unknown split {self.split!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"annotation {self.id}: confidence must be in [0, 1]")
        if self.clip_interval.end != self.interval.end:
            raise ValidationError(
                f"annotation {self.id}: clip and sign window must share an end (the peak)"
            )

    def with_split(self, split: str) -> "Annotation":
        return replace(self, split=split)


@dataclass
class DatasetManifest:
    vocabulary: tuple[str, ...]
    annotations: list[Annotation]
    split_spec: dict[str, str]
    config: PipelineConfig


def annotation_id(episode_id: str, word: str, peak_time: float) -> str:
    return f"{episode_id}:{word}:{round(peak_time * 1000):09d}"


def annotations_from_detections(
    detections: list[SpottedSign],
    episodes: dict[str, EpisodeMeta],
    cfg: PipelineConfig,
) -> list[Annotation]:
    """Attach signer identity and training-clip extents to detections."""
    clip_len = cfg.frames_before_peak / cfg.fps
    annotations = []
    seen: set[str] = set()
    for det in detections:
        meta = episodes.get(det.episode_id)
        if meta is None:
            raise ValidationError(f"detection references unknown episode {det.episode_id!r}")
        aid = annotation_id(det.episode_id, det.word, det.peak_time)
        if aid in seen:
            raise ValidationError(f"duplicate annotation id {aid!r} (same word, peak, episode)")
        seen.add(aid)
        clip_start = det.peak_time - clip_len
        truncated = det.truncated or clip_start < 0
        annotations.append(
            Annotation(
                id=aid,
                word=det.word,
                episode_id=det.episode_id,
                signer_id=meta.signer_id,
                interval=det.interval,
                clip_interval=TimeInterval(max(0.0, clip_start), det.peak_time),
                confidence=det.confidence,
                truncated=truncated,
            )
        )
    annotations.sort(key=lambda a: a.id)
    return annotations


def load_split_spec(path: str | Path) -> dict[str, str]:
    """Read the signer -> split map, rejecting duplicate signer keys."""

    def reject_duplicates(pairs):
        spec = {}
        for key, value in pairs:
            if key in spec and spec[key] != value:
                raise ValidationError(f"signer {key!r} assigned to two splits")
            spec[key] = value
        return spec

    raw = Path(path).read_text(encoding="utf-8")
    try:
        spec = json.loads(raw, object_pairs_hook=reject_duplicates)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    return validate_split_spec(spec)


def validate_split_spec(spec: dict[str, str]) -> dict[str, str]:
    for signer, split in spec.items():
        if split not in SPLITS:
            raise ValidationError(
                f"signer {signer!r}: split must be one of {SPLITS}, got {split!r}"
            )
    return spec


def assign_splits(
    annotations: list[Annotation],
    episodes: dict[str, EpisodeMeta],
    split_spec: dict[str, str],
) -> list[Annotation]:
    """Give each annotation its episode's signer's split."""
    validate_split_spec(split_spec)
    missing = sorted(
        {a.signer_id for a in annotations if a.signer_id not in split_spec}
    )
    if missing:
        raise ValidationError(f"signers missing from split spec: {', '.join(missing)}")
    return [a.with_split(split_spec[a.signer_id]) for a in annotations]


def split_balance(
    episodes: dict[str, EpisodeMeta], split_spec: dict[str, str]
) -> dict[str, dict[str, int]]:
    """Hearing/deaf/unknown signer counts per split (reported, not enforced)."""
    status_of: dict[str, str] = {}
    for meta in episodes.values():
        prev = status_of.get(meta.signer_id)
        if prev is not None and prev != meta.hearing_status:
            raise ValidationError(
                f"signer {meta.signer_id!r} has conflicting hearing status across episodes"
            )
        status_of[meta.signer_id] = meta.hearing_status
    balance = {s: {"hearing": 0, "deaf": 0, "unknown": 0} for s in SPLITS}
    for signer, split in split_spec.items():
        balance[split][status_of.get(signer, "unknown")] += 1
    return balance


def filter_vocabulary(
    annotations: list[Annotation], cfg: PipelineConfig
) -> tuple[tuple[str, ...], list[Annotation]]:
    """Keep words represented with high confidence in the training split.

    A word survives iff its best train-split confidence reaches the
    high-confidence threshold; annotations of dropped words are removed
    from every split.
    """
    best_train: dict[str, float] = defaultdict(float)
    for a in annotations:
        if a.split == "train":
            best_train[a.word] = max(best_train[a.word], a.confidence)
    vocab = tuple(
        sorted(w for w, c in best_train.items() if c >= cfg.high_confidence_threshold)
    )
    keep = set(vocab)
    return vocab, [a for a in annotations if a.word in keep]


def build_manifest(
    detections: list[SpottedSign],
    episodes: dict[str, EpisodeMeta],
    split_spec: dict[str, str],
    cfg: PipelineConfig,
) -> DatasetManifest:
    annotations = annotations_from_detections(detections, episodes, cfg)
    annotations = assign_splits(annotations, episodes, split_spec)
    vocabulary, annotations = filter_vocabulary(annotations, cfg)
    manifest = DatasetManifest(
        vocabulary=vocabulary,
        annotations=annotations,
        split_spec=dict(sorted(split_spec.items())),
        config=cfg,
    )
    validate_manifest(manifest)
    return manifest


def validate_manifest(manifest: DatasetManifest) -> None:
    validate_split_spec(manifest.split_spec)
    vocab = set(manifest.vocabulary)
    best_train: dict[str, float] = defaultdict(float)
    for a in manifest.annotations:
        if a.split not in SPLITS:
            raise ValidationError(f"annotation {a.id}: split not assigned")
        expected = manifest.split_spec.get(a.signer_id)
        if expected is None:
            raise ValidationError(f"annotation {a.id}: signer {a.signer_id!r} not in split spec")
        if a.split != expected:
            raise ValidationError(
                f"annotation {a.id}: split {a.split!r} contradicts signer assignment "
                f"{expected!r} (signer-disjointness violated)"
            )
        if a.word not in vocab:
            raise ValidationError(f"annotation {a.id}: word {a.word!r} not in vocabulary")
        if a.split == "train":
            best_train[a.word] = max(best_train[a.word], a.confidence)
    t = manifest.config.high_confidence_threshold
    weak = sorted(w for w in vocab if best_train[w] < t)
    if weak:
        raise ValidationError(
            f"words without a confident train instance (>= {t}): {', '.join(weak[:5])}"
        )


def subset_by_threshold(manifest: DatasetManifest, t: float) -> DatasetManifest:
    """View keeping annotations with confidence >= t; vocabulary unchanged."""
    if not 0.0 <= t <= 1.0:
        raise ValidationError(f"threshold must be in [0, 1], got {t}")
    return DatasetManifest(
        vocabulary=manifest.vocabulary,
        annotations=[a for a in manifest.annotations if a.confidence >= t],
        split_spec=manifest.split_spec,
        config=manifest.config,
    )


def stats(manifest: DatasetManifest) -> dict:
    """Per-split vocabulary/annotation/signer counts plus per-word counts."""
    per_split_words: dict[str, set[str]] = {s: set() for s in SPLITS}
    per_split_signers: dict[str, set[str]] = {s: set() for s in SPLITS}
    per_split_count: Counter = Counter()
    per_word: dict[str, Counter] = defaultdict(Counter)
    for a in manifest.annotations:
        per_split_words[a.split].add(a.word)
        per_split_signers[a.split].add(a.signer_id)
        per_split_count[a.split] += 1
        per_word[a.word][a.split] += 1
    return {
        "splits": {
            s: {
                "vocab": len(per_split_words[s]),
                "annotations": per_split_count[s],
                "signers": len(per_split_signers[s]),
            }
            for s in SPLITS
        },
        "per_word": {
            w: {s: per_word[w][s] for s in SPLITS} for w in sorted(per_word)
        },
    }


def per_word_histogram_csv(manifest: DatasetManifest) -> str:
    """CSV of per-word instance counts, one row per vocabulary word."""
    rows = ["word,train,val,test,total"]
    counts = stats(manifest)["per_word"]
    for w in manifest.vocabulary:
        c = counts.get(w, {s: 0 for s in SPLITS})
        total = sum(c.values())
        rows.append(f"{w},{c['train']},{c['val']},{c['test']},{total}")
    return "\n".join(rows) + "\n"


def save_manifest(manifest: DatasetManifest, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    head = {
        "vocabulary": list(manifest.vocabulary),
        "split_spec": manifest.split_spec,
        "config": manifest.config.to_dict(),
    }
    (out / "manifest.json").write_text(json.dumps(head, indent=2) + "\n", encoding="utf-8")
    lines = []
    for a in sorted(manifest.annotations, key=lambda a: a.id):
        lines.append(
            json.dumps(
                {
                    "id": a.id,
                    "word": a.word,
                    "episode_id": a.episode_id,
                    "signer_id": a.signer_id,
                    "start_s": a.interval.start,
                    "end_s": a.interval.end,
                    "clip_start_s": a.clip_interval.start,
                    "clip_end_s": a.clip_interval.end,
                    "confidence": a.confidence,
                    "split": a.split,
                    "truncated": a.truncated,
                }
            )
        )
    (out / "annotations.jsonl").write_text(
        "\n".join(lines) + ("\n" if lines else ""), encoding="utf-8"
    )


def load_manifest(manifest_dir: str | Path) -> DatasetManifest:
    root = Path(manifest_dir)
    try:
        head = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{root / 'manifest.json'}: invalid JSON ({exc})") from None
    config = head["config"]
    config["frames_before_peak"] = int(config["frames_before_peak"])
    annotations = []
    for line in (root / "annotations.jsonl").read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        annotations.append(
            Annotation(
                id=rec["id"],
                word=rec["word"],
                episode_id=rec["episode_id"],
                signer_id=rec["signer_id"],
                interval=TimeInterval(float(rec["start_s"]), float(rec["end_s"])),
                clip_interval=TimeInterval(
                    float(rec["clip_start_s"]), float(rec["clip_end_s"])
                ),
                confidence=float(rec["confidence"]),
                split=rec["split"],
                truncated=bool(rec.get("truncated", False)),
            )
        )
    manifest = DatasetManifest(
        vocabulary=tuple(head["vocabulary"]),
        annotations=annotations,
        split_spec=dict(head["split_spec"]),
        config=PipelineConfig(**config),
    )
    validate_manifest(manifest)
    return manifest
