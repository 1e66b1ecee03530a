import random

import pytest

import oracles
from helpers import cue, meta
from signforge.core import TimeInterval, ValidationError
from signforge.subtitles import (
    Corpus,
    EpisodeMeta,
    SrtParseError,
    SubtitleEntry,
    build_index,
    ingest,
    load_corpus,
    load_episodes,
    parse_srt,
    save_corpus,
    save_episodes,
    serialize_srt,
    tokenize,
)

SIMPLE = "1\n00:00:01,000 --> 00:00:02,500\nHello world\n\n"


class TestParseSrt:
    def test_single_cue(self):
        entries = parse_srt(SIMPLE, "ep1")
        assert entries == [
            SubtitleEntry("ep1", 1, TimeInterval(1.0, 2.5), "Hello world")
        ]

    def test_two_cues_in_time_order(self):
        raw = (
            "1\n00:00:01,000 --> 00:00:02,000\nfirst\n\n"
            "2\n00:00:03,000 --> 00:00:04,000\nsecond\n"
        )
        entries = parse_srt(raw)
        assert [e.index for e in entries] == [1, 2]
        assert entries[0].interval.end <= entries[1].interval.start

    def test_multiline_text_joined_with_spaces(self):
        raw = "1\n00:00:01,000 --> 00:00:02,000\nup\ndown\n"
        assert parse_srt(raw)[0].text == "up down"

    def test_empty_input(self):
        assert parse_srt("") == []
        assert parse_srt("\n\n  \n") == []

    def test_bom_tolerated(self):
        assert len(parse_srt("﻿" + SIMPLE)) == 1

    def test_end_before_start_names_cue(self):
        raw = "7\n00:00:05,000 --> 00:00:04,000\noops\n"
        with pytest.raises(SrtParseError, match="cue 7"):
            parse_srt(raw)

    def test_zero_duration_cue_rejected(self):
        raw = "1\n00:00:05,000 --> 00:00:05,000\noops\n"
        with pytest.raises(SrtParseError, match="cue 1"):
            parse_srt(raw)

    def test_malformed_timestamp_names_cue(self):
        raw = "3\n00:00:xx,000 --> 00:00:04,000\nhm\n"
        with pytest.raises(SrtParseError, match="cue 3"):
            parse_srt(raw)

    def test_non_integer_index(self):
        with pytest.raises(SrtParseError, match="integer index"):
            parse_srt("one\n00:00:01,000 --> 00:00:02,000\nhi\n")

    def test_non_increasing_index(self):
        raw = (
            "1\n00:00:01,000 --> 00:00:02,000\na\n\n"
            "1\n00:00:03,000 --> 00:00:04,000\nb\n"
        )
        with pytest.raises(SrtParseError, match="does not increase"):
            parse_srt(raw)

    def test_decreasing_start_time(self):
        raw = (
            "1\n00:00:05,000 --> 00:00:06,000\na\n\n"
            "2\n00:00:01,000 --> 00:00:02,000\nb\n"
        )
        with pytest.raises(SrtParseError, match="before the preceding"):
            parse_srt(raw)

    def test_missing_timestamp_line(self):
        with pytest.raises(SrtParseError, match="missing timestamp"):
            parse_srt("1\nno arrow here\n")

    def test_hours_beyond_two_digits(self):
        raw = "1\n100:00:01,000 --> 100:00:02,000\nlate\n"
        entries = parse_srt(raw)
        assert entries[0].interval.start == 360001.0


def _random_srt(n_cues: int, seed: int) -> str:
    rng = random.Random(seed)
    t_ms = 0
    blocks = []
    words = ["hello", "world", "don't", "sign", "BIG", "day..."]
    for i in range(1, n_cues + 1):
        t_ms += rng.randrange(1, 5000)
        start = t_ms
        t_ms += rng.randrange(1, 8000)
        text_lines = [
            " ".join(rng.choice(words) for _ in range(rng.randrange(1, 5)))
            for _ in range(rng.randrange(1, 3))
        ]
        def fmt(ms):
            h, rem = divmod(ms, 3_600_000)
            m, rem = divmod(rem, 60_000)
            s, ms_part = divmod(rem, 1000)
            return f"{h:02d}:{m:02d}:{s:02d},{ms_part:03d}"
        blocks.append(f"{i}\n{fmt(start)} --> {fmt(t_ms)}\n" + "\n".join(text_lines))
    return "\n\n".join(blocks) + "\n"


class TestRoundTrip:
    def test_parse_serialize_parse_fixed_point(self):
        raw = _random_srt(60, seed=4)
        first = parse_srt(raw, "ep")
        second = parse_srt(serialize_srt(first), "ep")
        assert second == first

    def test_serialize_format(self):
        entry = SubtitleEntry("ep", 1, TimeInterval(1.0, 2.5), "Hello world")
        assert serialize_srt([entry]) == "1\n00:00:01,000 --> 00:00:02,500\nHello world\n"


class TestTokenize:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("Happy, happy!", ["happy", "happy"]),
            ("don't", ["don't"]),
            ("", []),
            ("...", []),
            ("  spaced\tout ", ["spaced", "out"]),
            ("'quoted'", ["quoted"]),
            ("semi-detached", ["semi-detached"]),
            ("A B.", ["a", "b"]),
        ],
    )
    def test_examples(self, text, expected):
        assert tokenize(text) == expected


class TestBuildIndex:
    def test_single_cue_two_words(self):
        index = build_index([cue("ep1", 1, 0.0, 2.0, "happy day")])
        assert set(index) == {"happy", "day"}
        assert len(index["happy"]) == 1
        assert index["happy"][0].subtitle_index == 1

    def test_two_cues_time_order(self):
        entries = [
            cue("ep1", 2, 10.0, 12.0, "happy"),
            cue("ep1", 1, 0.0, 2.0, "happy"),
        ]
        occs = build_index(entries)["happy"]
        assert [o.subtitle_index for o in occs] == [1, 2]
        assert occs[0].interval.start < occs[1].interval.start

    def test_duplicate_word_in_one_cue_indexed_twice(self):
        index = build_index([cue("ep1", 1, 0.0, 2.0, "go go go")])
        assert len(index["go"]) == 3

    def test_token_conservation(self):
        raw = _random_srt(200, seed=9)
        entries = parse_srt(raw, "ep1")
        index = build_index(entries)
        indexed = sum(len(v) for v in index.values())
        assert indexed == oracles.count_tokens([e.text for e in entries])

    def test_input_order_invariance(self):
        entries = parse_srt(_random_srt(50, seed=2), "ep1")
        shuffled = entries[:]
        random.Random(0).shuffle(shuffled)
        assert build_index(shuffled) == build_index(entries)


class TestEpisodeMeta:
    def test_validation(self):
        with pytest.raises(ValidationError):
            meta(duration=0.0)
        with pytest.raises(ValidationError):
            meta(signer="")
        with pytest.raises(ValidationError):
            meta(status="left-handed")

    def test_save_load_round_trip(self, tmp_path):
        episodes = {
            "ep1": meta("ep1", signer="a", status="deaf"),
            "ep2": meta("ep2", signer="b"),
        }
        path = tmp_path / "episodes.jsonl"
        save_episodes(episodes, path)
        assert load_episodes(path) == episodes

    def test_duplicate_episode_rejected(self, tmp_path):
        path = tmp_path / "episodes.jsonl"
        record = (
            '{"episode_id": "ep1", "show_name": "s", "duration_s": 10.0,'
            ' "signer_id": "a", "hearing_status": "deaf"}'
        )
        path.write_text(record + "\n" + record + "\n")
        with pytest.raises(ValidationError, match="duplicate"):
            load_episodes(path)

    def test_invalid_json_names_line(self, tmp_path):
        path = tmp_path / "episodes.jsonl"
        path.write_text("{not json}\n")
        with pytest.raises(ValidationError, match="line 1"):
            load_episodes(path)


class TestCorpusIO:
    def _corpus(self):
        return Corpus(
            episodes={"ep1": meta("ep1"), "ep2": meta("ep2", signer="sig2")},
            entries=[
                cue("ep1", 1, 0.0, 2.0, "happy day"),
                cue("ep2", 1, 5.0, 7.0, "rainy day"),
            ],
        )

    def test_save_load_round_trip(self, tmp_path):
        corpus = self._corpus()
        save_corpus(corpus, tmp_path / "corpus")
        loaded = load_corpus(tmp_path / "corpus")
        assert loaded.episodes == corpus.episodes
        assert sorted(loaded.entries, key=lambda e: (e.episode_id, e.index)) == sorted(
            corpus.entries, key=lambda e: (e.episode_id, e.index)
        )

    def test_words(self):
        assert self._corpus().words() == {"happy", "day", "rainy"}

    def test_load_rejects_unknown_episode(self, tmp_path):
        corpus = self._corpus()
        save_corpus(corpus, tmp_path / "corpus")
        extra = '{"episode_id": "ghost", "index": 1, "start_s": 0.0, "end_s": 1.0, "text": "x"}'
        with (tmp_path / "corpus" / "subtitles.jsonl").open("a") as fh:
            fh.write(extra + "\n")
        with pytest.raises(ValidationError, match="ghost"):
            load_corpus(tmp_path / "corpus")


class TestIngest:
    def test_ingest_directory(self, tmp_path):
        srt_dir = tmp_path / "srt"
        srt_dir.mkdir()
        (srt_dir / "ep1.srt").write_text(SIMPLE)
        (srt_dir / "ep2.srt").write_text(
            "1\n00:00:10,000 --> 00:00:12,000\nanother day\n"
        )
        episodes = {"ep1": meta("ep1"), "ep2": meta("ep2", signer="sig2")}
        save_episodes(episodes, tmp_path / "episodes.jsonl")
        corpus = ingest(srt_dir, tmp_path / "episodes.jsonl")
        assert {e.episode_id for e in corpus.entries} == {"ep1", "ep2"}
        assert corpus.index()["day"][0].episode_id == "ep2"

    def test_srt_without_metadata_is_an_error(self, tmp_path):
        srt_dir = tmp_path / "srt"
        srt_dir.mkdir()
        (srt_dir / "mystery.srt").write_text(SIMPLE)
        save_episodes({"ep1": meta("ep1")}, tmp_path / "episodes.jsonl")
        with pytest.raises(ValidationError, match="mystery"):
            ingest(srt_dir, tmp_path / "episodes.jsonl")

    def test_metadata_may_cover_extra_episodes(self, tmp_path):
        srt_dir = tmp_path / "srt"
        srt_dir.mkdir()
        (srt_dir / "ep1.srt").write_text(SIMPLE)
        episodes = {"ep1": meta("ep1"), "spare": meta("spare", signer="sig9")}
        save_episodes(episodes, tmp_path / "episodes.jsonl")
        corpus = ingest(srt_dir, tmp_path / "episodes.jsonl")
        assert len(corpus.entries) == 1
        assert "spare" in corpus.episodes


def test_episode_meta_is_episodemeta_type():
    assert isinstance(meta(), EpisodeMeta)
