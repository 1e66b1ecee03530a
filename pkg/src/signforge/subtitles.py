"""SRT parsing, tokenization, and the inverted word-occurrence index."""

from __future__ import annotations

import json
import re
import string
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from signforge.core import TimeInterval, ValidationError


class SrtParseError(ValidationError):
    """Malformed SRT input; the message names the offending cue."""


@dataclass(frozen=True)
class SubtitleEntry:
    episode_id: str
    index: int
    interval: TimeInterval
    text: str


@dataclass(frozen=True)
class EpisodeMeta:
    episode_id: str
    show_name: str
    duration: float
    signer_id: str
    hearing_status: str

    def __post_init__(self) -> None:
        if not self.duration > 0:
            raise ValidationError(f"episode {self.episode_id}: duration must be > 0")
        if not self.signer_id:
            raise ValidationError(f"episode {self.episode_id}: signer_id must be non-empty")
        if self.hearing_status not in HEARING_STATUSES:
            raise ValidationError(
                f"episode {self.episode_id}: hearing_status must be one of "
                f"{sorted(HEARING_STATUSES)}, got {self.hearing_status!r}"
            )


HEARING_STATUSES = {"hearing", "deaf", "unknown"}


@dataclass(frozen=True)
class WordOccurrence:
    word: str
    episode_id: str
    subtitle_index: int
    interval: TimeInterval


_TIMESTAMP_RE = re.compile(r"^(\d{2,}):([0-5]\d):([0-5]\d),(\d{3})$")
_CUE_SEP_RE = re.compile(r"\n\s*\n")


def _parse_timestamp(raw: str, cue: int) -> float:
    m = _TIMESTAMP_RE.match(raw.strip())
    if m is None:
        raise SrtParseError(f"cue {cue}: malformed timestamp {raw.strip()!r}")
    h, mi, s, ms = (int(g) for g in m.groups())
    return h * 3600 + mi * 60 + s + ms / 1000.0


def _format_timestamp(t: float) -> str:
    ms = round(t * 1000)
    h, rem = divmod(ms, 3_600_000)
    mi, rem = divmod(rem, 60_000)
    s, ms = divmod(rem, 1000)
    return f"{h:02d}:{mi:02d}:{s:02d},{ms:03d}"


def parse_srt(raw: str, episode_id: str = "") -> list[SubtitleEntry]:
    """Parse SRT text into time-ordered subtitle entries.

    Cues must carry strictly increasing indices and non-decreasing start
    times; a cue ending at or before its start is rejected. Empty input
    yields an empty list.
    """
    entries: list[SubtitleEntry] = []
    prev_index = 0
    prev_start = -1.0
    for block in _CUE_SEP_RE.split(raw.strip("﻿").strip()):
        lines = block.strip().splitlines()
        if not lines:
            continue
        cue_no = prev_index + 1
        try:
            index = int(lines[0].strip())
        except ValueError:
            raise SrtParseError(f"cue {cue_no}: expected integer index, got {lines[0]!r}") from None
        if index <= prev_index:
            raise SrtParseError(f"cue {index}: index does not increase (previous {prev_index})")
        if len(lines) < 2 or "-->" not in lines[1]:
            raise SrtParseError(f"cue {index}: missing timestamp line")
        start_raw, _, end_raw = lines[1].partition("-->")
        start = _parse_timestamp(start_raw, index)
        end = _parse_timestamp(end_raw, index)
        if end <= start:
            raise SrtParseError(f"cue {index}: end {end_raw.strip()} not after start")
        if start < prev_start:
            raise SrtParseError(f"cue {index}: starts before the preceding cue")
        text = " ".join(line.strip() for line in lines[2:]).strip()
        entries.append(SubtitleEntry(episode_id, index, TimeInterval(start, end), text))
        prev_index = index
        prev_start = start
    return entries


def serialize_srt(entries: list[SubtitleEntry]) -> str:
    blocks = []
    for e in entries:
        blocks.append(
            f"{e.index}\n"
            f"{_format_timestamp(e.interval.start)} --> {_format_timestamp(e.interval.end)}\n"
            f"{e.text}\n"
        )
    return "\n".join(blocks)


_STRIP_CHARS = string.punctuation + "‘’“”…–—¡¿«»"


def tokenize(text: str) -> list[str]:
    """Lowercase whitespace tokens with edge punctuation stripped.

    Internal apostrophes survive ("don't"); tokens that are all
    punctuation are dropped.
    """
    out = []
    for raw in text.lower().split():
        tok = raw.strip(_STRIP_CHARS)
        if tok:
            out.append(tok)
    return out


def build_index(entries: list[SubtitleEntry]) -> dict[str, list[WordOccurrence]]:
    """Inverted index word -> occurrences, one per token appearance.

    A word appearing twice in one cue is indexed twice, so summed
    occurrence counts equal the corpus token count. Occurrences are
    time-ordered within each episode; input cue order is irrelevant.
    """
    ordered = sorted(entries, key=lambda e: (e.episode_id, e.interval.start, e.index))
    index: dict[str, list[WordOccurrence]] = defaultdict(list)
    for e in ordered:
        for tok in tokenize(e.text):
            index[tok].append(WordOccurrence(tok, e.episode_id, e.index, e.interval))
    return dict(index)


def load_episodes(path: str | Path) -> dict[str, EpisodeMeta]:
    """Read episode metadata JSON Lines keyed by episode_id."""
    episodes: dict[str, EpisodeMeta] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path} line {lineno}: invalid JSON ({exc})") from None
        meta = EpisodeMeta(
            episode_id=rec["episode_id"],
            show_name=rec.get("show_name", ""),
            duration=float(rec["duration_s"]),
            signer_id=rec["signer_id"],
            hearing_status=rec.get("hearing_status", "unknown"),
        )
        if meta.episode_id in episodes:
            raise ValidationError(f"{path} line {lineno}: duplicate episode {meta.episode_id}")
        episodes[meta.episode_id] = meta
    return episodes


def save_episodes(episodes: dict[str, EpisodeMeta], path: str | Path) -> None:
    lines = []
    for ep in sorted(episodes.values(), key=lambda m: m.episode_id):
        lines.append(
            json.dumps(
                {
                    "episode_id": ep.episode_id,
                    "show_name": ep.show_name,
                    "duration_s": ep.duration,
                    "signer_id": ep.signer_id,
                    "hearing_status": ep.hearing_status,
                }
            )
        )
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


@dataclass
class Corpus:
    """Parsed subtitle corpus plus episode metadata."""

    episodes: dict[str, EpisodeMeta]
    entries: list[SubtitleEntry]

    def index(self) -> dict[str, list[WordOccurrence]]:
        return build_index(self.entries)

    def words(self) -> set[str]:
        return set(self.index())


def ingest(srt_dir: str | Path, episodes_path: str | Path) -> Corpus:
    """Parse every ``*.srt`` under `srt_dir` (episode id = file stem)."""
    episodes = load_episodes(episodes_path)
    entries: list[SubtitleEntry] = []
    srt_paths = sorted(Path(srt_dir).glob("*.srt"))
    for p in srt_paths:
        episode_id = p.stem
        if episode_id not in episodes:
            raise ValidationError(f"{p}: no metadata for episode {episode_id!r}")
        entries.extend(parse_srt(p.read_text(encoding="utf-8"), episode_id))
    return Corpus(episodes=episodes, entries=entries)


def save_corpus(corpus: Corpus, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_episodes(corpus.episodes, out / "episodes.jsonl")
    lines = []
    ordered = sorted(corpus.entries, key=lambda e: (e.episode_id, e.interval.start, e.index))
    for e in ordered:
        lines.append(
            json.dumps(
                {
                    "episode_id": e.episode_id,
                    "index": e.index,
                    "start_s": e.interval.start,
                    "end_s": e.interval.end,
                    "text": e.text,
                }
            )
        )
    (out / "subtitles.jsonl").write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_corpus(corpus_dir: str | Path) -> Corpus:
    root = Path(corpus_dir)
    episodes = load_episodes(root / "episodes.jsonl")
    entries = []
    sub_path = root / "subtitles.jsonl"
    for lineno, line in enumerate(sub_path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        rec = json.loads(line)
        if rec["episode_id"] not in episodes:
            raise ValidationError(
                f"{sub_path} line {lineno}: unknown episode {rec['episode_id']!r}"
            )
        entries.append(
            SubtitleEntry(
                rec["episode_id"],
                int(rec["index"]),
                TimeInterval(float(rec["start_s"]), float(rec["end_s"])),
                rec["text"],
            )
        )
    return Corpus(episodes=episodes, entries=entries)
