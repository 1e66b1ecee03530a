"""Query-vocabulary construction from word lists and the corpus index."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from signforge.core import ValidationError
from signforge.subtitles import WordOccurrence, tokenize


@dataclass(frozen=True)
class Vocabulary:
    """An ordered set of normalized query words.

    `provenance` maps each word to the names of the word-list sources
    that contain it.
    """

    words: tuple[str, ...]
    provenance: dict[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        seen = set()
        for w in self.words:
            if w in seen:
                raise ValidationError(f"duplicate vocabulary word {w!r}")
            if tokenize(w) != [w]:
                raise ValidationError(f"vocabulary word {w!r} is not a normalized token")
            seen.add(w)

    def __contains__(self, word: object) -> bool:
        return word in set(self.words)

    def __iter__(self):
        return iter(self.words)

    def __len__(self) -> int:
        return len(self.words)


def _normalize_entry(raw: str, source: str, lineno: int) -> str | None:
    line = raw.split("#", 1)[0].strip()
    if not line:
        return None
    toks = tokenize(line)
    if len(toks) != 1:
        raise ValidationError(
            f"{source} line {lineno}: expected one word per line, got {line!r}"
        )
    return toks[0]


def load_word_list(path: str | Path) -> list[str]:
    """Read a one-word-per-line UTF-8 list; `#` starts a comment.

    Entries are normalized like subtitle tokens. An empty list is an
    error because an empty dictionary silently empties every
    intersection built on it.
    """
    p = Path(path)
    words: list[str] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
        word = _normalize_entry(raw, str(p), lineno)
        if word is not None and word not in seen:
            words.append(word)
            seen.add(word)
    if not words:
        raise ValidationError(f"{p}: word list is empty")
    return words


def save_word_list(words, path: str | Path) -> None:
    ordered = sorted(set(words))
    Path(path).write_text("\n".join(ordered) + ("\n" if ordered else ""), encoding="utf-8")


def build_initial_vocab(
    index: dict[str, list[WordOccurrence]],
    dictionaries: dict[str, list[str]],
) -> Vocabulary:
    """Intersect corpus words with every dictionary.

    `dictionaries` maps a source name to its word list. A word enters
    the vocabulary only if it occurs in the subtitle index and in every
    dictionary; the result is sorted. Order of dictionaries is
    irrelevant. An empty result is legal.
    """
    if not dictionaries:
        raise ValidationError("at least one dictionary is required")
    for name, words in dictionaries.items():
        if not words:
            raise ValidationError(f"dictionary {name!r} is empty")
    kept = set(index)
    for words in dictionaries.values():
        kept &= set(words)
    ordered = tuple(sorted(kept))
    provenance = {
        w: frozenset(name for name, words in dictionaries.items() if w in set(words))
        for w in ordered
    }
    return Vocabulary(words=ordered, provenance=provenance)


def load_vocab(path: str | Path) -> Vocabulary:
    p = Path(path)
    words = load_word_list(p)
    src = p.name
    return Vocabulary(words=tuple(words), provenance={w: frozenset({src}) for w in words})


def save_vocab(vocab: Vocabulary, path: str | Path) -> None:
    save_word_list(vocab.words, path)


def default_vocab_path() -> Path:
    return Path(str(resources.files("signforge").joinpath("data/bsl_vocab.txt")))


def load_default_vocab() -> Vocabulary:
    """The bundled 1,064-word query vocabulary."""
    return load_vocab(default_vocab_path())
