import json

import pytest
from click.testing import CliRunner

from helpers import annotation, manifest, meta
from signforge.cli import main
from signforge.dataset import save_manifest
from signforge.subtitles import save_episodes

SYNTH_CFG = """\
seed = 5
n_episodes = 2
episode_duration_s = 600
vocab_size = 30
signs_per_minute = 12
"""


def _run(args, **kwargs):
    return CliRunner().invoke(main, args, catch_exceptions=False, **kwargs)


@pytest.fixture(scope="module")
def pipeline_dir(tmp_path_factory):
    """One full synth -> vocab -> propose -> localize -> build chain."""
    root = tmp_path_factory.mktemp("chain")
    (root / "synth.cfg").write_text(SYNTH_CFG)
    (root / "splits.json").write_text('{"signer00": "train", "signer01": "test"}')

    steps = [
        ["synth", "--config", str(root / "synth.cfg"), "-o", str(root / "sandbox")],
        [
            "vocab",
            str(root / "sandbox"),
            "--dict",
            str(root / "sandbox" / "vocab.txt"),
            "-o",
            str(root / "vocab_built.txt"),
        ],
        [
            "propose",
            str(root / "sandbox"),
            str(root / "vocab_built.txt"),
            "-o",
            str(root / "windows.jsonl"),
        ],
        [
            "localize",
            str(root / "windows.jsonl"),
            str(root / "sandbox" / "posteriors.jsonl"),
            "-o",
            str(root / "detections.jsonl"),
        ],
        [
            "build",
            str(root / "detections.jsonl"),
            "--episodes",
            str(root / "sandbox" / "episodes.jsonl"),
            "--splits",
            str(root / "splits.json"),
            "-o",
            str(root / "manifest"),
        ],
    ]
    for args in steps:
        result = _run(args)
        assert result.exit_code == 0, f"{args[0]} failed: {result.output}{result.stderr}"
    return root


class TestSynthChain:
    def test_synth_reports_counts(self, pipeline_dir):
        result = _run(
            ["synth", "--config", str(pipeline_dir / "synth.cfg"), "-o",
             str(pipeline_dir / "sandbox_again")]
        )
        assert result.exit_code == 0
        assert "2 episodes, 240 signs (240 mouthed)" in result.output

    def test_vocab_size(self, pipeline_dir):
        words = (pipeline_dir / "vocab_built.txt").read_text().split()
        assert len(words) == 30

    def test_propose_is_deterministic(self, pipeline_dir):
        result = _run(
            [
                "propose",
                str(pipeline_dir / "sandbox"),
                str(pipeline_dir / "vocab_built.txt"),
                "-o",
                str(pipeline_dir / "windows2.jsonl"),
            ]
        )
        assert result.exit_code == 0
        first = (pipeline_dir / "windows.jsonl").read_bytes()
        second = (pipeline_dir / "windows2.jsonl").read_bytes()
        assert first == second

    def test_localize_reports_dedup(self, pipeline_dir):
        result = _run(
            [
                "localize",
                str(pipeline_dir / "windows.jsonl"),
                str(pipeline_dir / "sandbox" / "posteriors.jsonl"),
                "-o",
                str(pipeline_dir / "detections2.jsonl"),
            ]
        )
        assert result.exit_code == 0
        assert "after dedup" in result.output

    def test_synth_score_perfect(self, pipeline_dir):
        result = _run(
            [
                "synth-score",
                str(pipeline_dir / "sandbox"),
                str(pipeline_dir / "detections.jsonl"),
            ]
        )
        assert result.exit_code == 0
        assert "recall 1.0000" in result.output
        assert "precision 1.0000" in result.output
        assert "max_frame_error 0" in result.output
        assert "signs 240 mouthed 240" in result.output

    def test_build_prints_split_rows(self, pipeline_dir):
        manifest_dir = pipeline_dir / "manifest"
        assert (manifest_dir / "manifest.json").exists()
        assert (manifest_dir / "annotations.jsonl").exists()
        result = _run(["stats", str(manifest_dir)])
        assert result.exit_code == 0
        assert "train: vocab 30 annotations 120 signers 1" in result.output
        assert "test: vocab 30 annotations 120 signers 1" in result.output
        assert "val: vocab 0 annotations 0 signers 0" in result.output

    def test_stats_histogram(self, pipeline_dir):
        hist = pipeline_dir / "hist.csv"
        result = _run(["stats", str(pipeline_dir / "manifest"), "--hist-csv", str(hist)])
        assert result.exit_code == 0
        lines = hist.read_text().strip().splitlines()
        assert lines[0] == "word,train,val,test,total"
        assert len(lines) == 31
        assert all(line.endswith(",4,0,4,8") for line in lines[1:])


class TestIngestVocab:
    def test_ingest_then_vocab(self, tmp_path):
        srt_dir = tmp_path / "srt"
        srt_dir.mkdir()
        (srt_dir / "ep1.srt").write_text(
            "1\n00:00:01,000 --> 00:00:03,000\nhappy day\n\n"
            "2\n00:00:05,000 --> 00:00:07,000\nhappy again\n"
        )
        save_episodes({"ep1": meta("ep1")}, tmp_path / "episodes.jsonl")
        result = _run(
            ["ingest", str(srt_dir), str(tmp_path / "episodes.jsonl"), "-o",
             str(tmp_path / "corpus")]
        )
        assert result.exit_code == 0
        assert "1 episodes, 2 cues, 4 tokens" in result.output

        (tmp_path / "dict.txt").write_text("happy\nday\nzebra\n")
        result = _run(
            ["vocab", str(tmp_path / "corpus"), "--dict", str(tmp_path / "dict.txt"),
             "-o", str(tmp_path / "vocab_built.txt")]
        )
        assert result.exit_code == 0
        assert "vocabulary of 2 words" in result.output


class TestEvalCommands:
    @pytest.fixture()
    def eval_manifest(self, tmp_path):
        anns = [
            annotation("tr1", "wone", "ep_s", "sa", 5.6, 0.9, "train"),
            annotation("tr2", "wtwo", "ep_s", "sa", 50.6, 0.9, "train"),
            annotation("te1", "wone", "ep_t", "sb", 10.6, 0.95, "test"),
            annotation("te2", "wone", "ep_t", "sb", 20.6, 0.92, "test"),
            annotation("te3", "wtwo", "ep_t", "sb", 40.6, 0.91, "test"),
        ]
        save_manifest(manifest(anns), tmp_path / "manifest")
        return tmp_path

    def test_eval_recognition(self, eval_manifest):
        preds = eval_manifest / "preds.jsonl"
        preds.write_text(
            '{"annotation_id": "te1", "ranked_words": ["wone"]}\n'
            '{"annotation_id": "te2", "ranked_words": ["wtwo", "wone"]}\n'
            '{"annotation_id": "te3", "ranked_words": ["wtwo"]}\n'
        )
        report = eval_manifest / "recog.json"
        result = _run(
            ["eval-recognition", str(eval_manifest / "manifest"), str(preds),
             "--k", "1", "--k", "2", "-o", str(report)]
        )
        assert result.exit_code == 0
        assert "top-1: per-instance 0.6667 per-class 0.7500" in result.output
        assert "top-2: per-instance 1.0000 per-class 1.0000" in result.output
        saved = json.loads(report.read_text())
        assert saved["metrics"]["top1"]["per_class"] == 0.75

    def test_eval_spotting_fixture(self, eval_manifest):
        preds = eval_manifest / "spots.jsonl"
        preds.write_text(
            '{"episode_id": "ep_t", "word": "wone", "start_s": 9.9, "end_s": 10.5, "score": 0.9}\n'
            '{"episode_id": "ep_t", "word": "wone", "start_s": 15.0, "end_s": 15.6, "score": 0.8}\n'
            '{"episode_id": "ep_t", "word": "wone", "start_s": 19.9, "end_s": 20.5, "score": 0.7}\n'
            '{"episode_id": "ep_t", "word": "wtwo", "start_s": 40.0, "end_s": 40.6, "score": 0.9}\n'
        )
        report = eval_manifest / "spot.json"
        per_class = eval_manifest / "per_class.csv"
        result = _run(
            ["eval-spotting", str(eval_manifest / "manifest"), str(preds),
             "-o", str(report), "--per-class", str(per_class)]
        )
        assert result.exit_code == 0
        assert "classes: 2" in result.output
        assert "mAP@0.5: 0.9167" in result.output
        saved = json.loads(report.read_text())
        assert abs(saved["per_class"]["wone"] - 5.0 / 6.0) < 1e-9
        assert saved["per_class"]["wtwo"] == 1.0
        rows = per_class.read_text().strip().splitlines()
        assert rows[0] == "word,ap,positives"
        assert rows[1].startswith("wone,0.833333,2")

    def test_eval_spotting_verified_relabels(self, eval_manifest):
        verified = eval_manifest / "verified.json"
        verified.write_text(
            json.dumps(
                {
                    "entries": [
                        {"annotation_id": "te1", "word": "wone",
                         "provenance": "verified_as_is"}
                    ]
                }
            )
        )
        preds = eval_manifest / "spots.jsonl"
        preds.write_text(
            '{"episode_id": "ep_t", "word": "wone", "start_s": 9.9, "end_s": 10.5, "score": 0.9}\n'
        )
        result = _run(
            ["eval-spotting", str(eval_manifest / "manifest"), str(preds),
             "--verified", str(verified)]
        )
        assert result.exit_code == 0
        assert "classes: 1" in result.output
        assert "mAP@0.5: 1.0000" in result.output

    def test_eval_spotting_exclusion_zones(self, eval_manifest):
        corpus_dir = eval_manifest / "corpus"
        corpus_dir.mkdir()
        (corpus_dir / "episodes.jsonl").write_text(
            '{"episode_id": "ep_t", "show_name": "s", "duration_s": 3600.0,'
            ' "signer_id": "sb", "hearing_status": "deaf"}\n'
        )
        (corpus_dir / "subtitles.jsonl").write_text(
            '{"episode_id": "ep_t", "index": 1, "start_s": 100.0, "end_s": 102.0,'
            ' "text": "wone"}\n'
        )
        (eval_manifest / "auto.jsonl").write_text("")
        verified = eval_manifest / "verified.json"
        verified.write_text(
            json.dumps(
                {
                    "entries": [
                        {"annotation_id": "te1", "word": "wone",
                         "provenance": "verified_as_is"}
                    ]
                }
            )
        )
        preds = eval_manifest / "spots.jsonl"
        preds.write_text(
            '{"episode_id": "ep_t", "word": "wone", "start_s": 100.7, "end_s": 101.3, "score": 0.99}\n'
            '{"episode_id": "ep_t", "word": "wone", "start_s": 9.9, "end_s": 10.5, "score": 0.9}\n'
        )
        with_zones = _run(
            ["eval-spotting", str(eval_manifest / "manifest"), str(preds),
             "--verified", str(verified),
             "--corpus", str(corpus_dir),
             "--auto-detections", str(eval_manifest / "auto.jsonl")]
        )
        assert with_zones.exit_code == 0
        assert "mAP@0.5: 1.0000" in with_zones.output

        without_zones = _run(
            ["eval-spotting", str(eval_manifest / "manifest"), str(preds),
             "--verified", str(verified)]
        )
        assert without_zones.exit_code == 0
        assert "mAP@0.5: 0.5000" in without_zones.output


class TestErrorHandling:
    def test_validation_error_exits_1(self, tmp_path):
        (tmp_path / "bad.cfg").write_text("bogus_key = 1\n")
        (tmp_path / "windows.jsonl").write_text("")
        (tmp_path / "posteriors.jsonl").write_text("")
        result = CliRunner().invoke(
            main,
            ["localize", str(tmp_path / "windows.jsonl"), str(tmp_path / "posteriors.jsonl"),
             "--config", str(tmp_path / "bad.cfg"), "-o", str(tmp_path / "out.jsonl")],
        )
        assert result.exit_code == 1
        assert result.stderr.startswith("error:")

    def test_missing_file_exits_2(self, tmp_path):
        result = CliRunner().invoke(main, ["stats", str(tmp_path / "nowhere")])
        assert result.exit_code == 2
        assert "error:" in result.stderr

    def test_usage_error_exits_2(self, tmp_path):
        result = CliRunner().invoke(main, ["vocab", str(tmp_path)])
        assert result.exit_code == 2

    def test_unknown_window_exits_1(self, tmp_path):
        (tmp_path / "windows.jsonl").write_text("")
        (tmp_path / "posteriors.jsonl").write_text(
            '{"window_id": "ghost:1:0:w", "word": "w", "episode_id": "ep",'
            ' "window_start_s": 0.0, "stride_s": 0.04, "posteriors": [0.9]}\n'
        )
        result = CliRunner().invoke(
            main,
            ["localize", str(tmp_path / "windows.jsonl"), str(tmp_path / "posteriors.jsonl"),
             "-o", str(tmp_path / "out.jsonl")],
        )
        assert result.exit_code == 1
        assert "unknown window" in result.stderr

    def test_serve_rejects_bad_addr(self, tmp_path):
        anns = [
            annotation("tr1", "wone", "ep_s", "sa", 5.6, 0.9, "train"),
        ]
        save_manifest(manifest(anns), tmp_path / "manifest")
        result = CliRunner().invoke(
            main, ["serve", str(tmp_path / "manifest"), "--addr", "nonsense"]
        )
        assert result.exit_code == 1
        assert "--addr" in result.stderr
