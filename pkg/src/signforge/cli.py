"""Command-line entry point for the annotation pipeline and benchmarks."""

from __future__ import annotations

import dataclasses
import functools
import json
import sys
from pathlib import Path

import click

from signforge import dataset as ds
from signforge import evaluation as ev
from signforge import localizer as loc
from signforge import subtitles as sub
from signforge import synth as sy
from signforge import vocab as vb
from signforge.core import ValidationError, load_config, load_default_config
from signforge.service import VerificationService, create_app, load_verified_set


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValueError as exc:
            _fail(str(exc), 1)
        except OSError as exc:
            _fail(str(exc), 2)

    return wrapper


def _load_cfg(path: str | None):
    return load_config(path) if path else load_default_config()


_config_option = click.option(
    "--config", "config_path", type=click.Path(dir_okay=False), default=None,
    help="Pipeline config file (key = value); defaults to the shipped constants.",
)


@click.group()
def main() -> None:
    """Subtitle-driven sign annotation pipeline and its benchmarks."""


@main.command()
@click.argument("srt_dir", type=click.Path(file_okay=False))
@click.argument("episodes", type=click.Path(dir_okay=False))
@click.option("-o", "--out", "out_dir", required=True, type=click.Path(file_okay=False))
@_handle_errors
def ingest(srt_dir, episodes, out_dir):
    """Parse SRT files plus episode metadata into a corpus directory."""
    corpus = sub.ingest(srt_dir, episodes)
    sub.save_corpus(corpus, out_dir)
    n_tokens = sum(len(sub.tokenize(e.text)) for e in corpus.entries)
    click.echo(
        f"ingested {len(corpus.episodes)} episodes, "
        f"{len(corpus.entries)} cues, {n_tokens} tokens -> {out_dir}"
    )


@main.command()
@click.argument("corpus_dir", type=click.Path(file_okay=False))
@click.option("--dict", "dictionaries", multiple=True, required=True,
              type=click.Path(dir_okay=False), help="Word-list file; repeatable.")
@click.option("-o", "--out", "out_path", required=True, type=click.Path(dir_okay=False))
@_handle_errors
def vocab(corpus_dir, dictionaries, out_path):
    """Intersect corpus words with every dictionary word list."""
    corpus = sub.load_corpus(corpus_dir)
    dicts = {str(p): vb.load_word_list(p) for p in dictionaries}
    vocabulary = vb.build_initial_vocab(corpus.index(), dicts)
    vb.save_vocab(vocabulary, out_path)
    click.echo(f"vocabulary of {len(vocabulary)} words -> {out_path}")


@main.command()
@click.argument("corpus_dir", type=click.Path(file_okay=False))
@click.argument("vocab_path", type=click.Path(dir_okay=False))
@_config_option
@click.option("-o", "--out", "out_path", required=True, type=click.Path(dir_okay=False))
@_handle_errors
def propose(corpus_dir, vocab_path, config_path, out_path):
    """Emit one padded candidate window per subtitle occurrence."""
    cfg = _load_cfg(config_path)
    corpus = sub.load_corpus(corpus_dir)
    vocabulary = vb.load_vocab(vocab_path)
    windows = loc.propose_windows(vocabulary, corpus.index(), corpus.episodes, cfg)
    loc.save_windows(windows, out_path)
    click.echo(f"{len(windows)} candidate windows -> {out_path}")


@main.command()
@click.argument("windows_path", type=click.Path(dir_okay=False))
@click.argument("posteriors_path", type=click.Path(dir_okay=False))
@_config_option
@click.option("-o", "--out", "out_path", required=True, type=click.Path(dir_okay=False))
@_handle_errors
def localize(windows_path, posteriors_path, config_path, out_path):
    """Turn posterior streams into deduplicated sign detections."""
    cfg = _load_cfg(config_path)
    windows = {w.id: w for w in loc.load_windows(windows_path)}
    streams = loc.load_streams(posteriors_path)
    detections = []
    for stream in streams:
        if stream.window_id not in windows:
            raise ValidationError(f"stream references unknown window {stream.window_id!r}")
        det = loc.localize(stream, cfg)
        if det is not None:
            detections.append(det)
    survivors = loc.nms(detections, cfg)
    loc.save_detections(survivors, out_path)
    click.echo(
        f"{len(detections)} localized, {len(survivors)} after dedup -> {out_path}"
    )


@main.command()
@click.argument("detections_path", type=click.Path(dir_okay=False))
@click.option("--episodes", "episodes_path", required=True, type=click.Path(dir_okay=False),
              help="Episode metadata JSON Lines (signer lookup).")
@click.option("--splits", "splits_path", required=True, type=click.Path(dir_okay=False),
              help="JSON map signer_id -> train|val|test.")
@_config_option
@click.option("-o", "--out", "out_dir", required=True, type=click.Path(file_okay=False))
@_handle_errors
def build(detections_path, episodes_path, splits_path, config_path, out_dir):
    """Assemble a dataset manifest from detections."""
    cfg = _load_cfg(config_path)
    detections = loc.load_detections(detections_path)
    episodes = sub.load_episodes(episodes_path)
    split_spec = ds.load_split_spec(splits_path)
    manifest = ds.build_manifest(detections, episodes, split_spec, cfg)
    ds.save_manifest(manifest, out_dir)
    s = ds.stats(manifest)
    click.echo(f"manifest with {len(manifest.vocabulary)} words -> {out_dir}")
    for split in ds.SPLITS:
        row = s["splits"][split]
        click.echo(
            f"  {split}: vocab {row['vocab']} annotations {row['annotations']} "
            f"signers {row['signers']}"
        )
    balance = ds.split_balance(episodes, split_spec)
    for split in ds.SPLITS:
        b = balance[split]
        click.echo(
            f"  {split} signer balance hearing/deaf/unknown: "
            f"{b['hearing']}/{b['deaf']}/{b['unknown']}"
        )


@main.command()
@click.argument("manifest_dir", type=click.Path(file_okay=False))
@click.option("--hist-csv", "hist_path", type=click.Path(dir_okay=False), default=None,
              help="Also write the per-word instance-count CSV here.")
@_handle_errors
def stats(manifest_dir, hist_path):
    """Report per-split dataset statistics."""
    manifest = ds.load_manifest(manifest_dir)
    s = ds.stats(manifest)
    for split in ds.SPLITS:
        row = s["splits"][split]
        click.echo(
            f"{split}: vocab {row['vocab']} annotations {row['annotations']} "
            f"signers {row['signers']}"
        )
    click.echo(
        f"total: vocab {len(manifest.vocabulary)} annotations {len(manifest.annotations)}"
    )
    if hist_path:
        Path(hist_path).write_text(ds.per_word_histogram_csv(manifest), encoding="utf-8")
        click.echo(f"per-word histogram -> {hist_path}")


@main.command("eval-recognition")
@click.argument("manifest_dir", type=click.Path(file_okay=False))
@click.argument("predictions", type=click.Path(dir_okay=False))
@click.option("--k", "ks", multiple=True, type=int, default=(1, 5), show_default=True)
@click.option("--split", default="test", show_default=True,
              type=click.Choice(ds.SPLITS))
@click.option("-o", "--out", "report_path", type=click.Path(dir_okay=False), default=None)
@_handle_errors
def eval_recognition(manifest_dir, predictions, ks, split, report_path):
    """Score ranked-word predictions with top-k accuracy."""
    manifest = ds.load_manifest(manifest_dir)
    gt = [a for a in manifest.annotations if a.split == split]
    preds = ev.load_recognition_predictions(predictions)
    report = {"split": split, "instances": len(gt), "metrics": {}}
    for k in ks:
        per_instance, per_class = ev.topk_accuracy(gt, preds, k)
        report["metrics"][f"top{k}"] = {
            "per_instance": per_instance,
            "per_class": per_class,
        }
        click.echo(
            f"top-{k}: per-instance {per_instance:.4f} per-class {per_class:.4f}"
        )
    if report_path:
        Path(report_path).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")


@main.command("eval-spotting")
@click.argument("manifest_dir", type=click.Path(file_okay=False))
@click.argument("predictions", type=click.Path(dir_okay=False))
@click.option("--verified", "verified_path", type=click.Path(dir_okay=False), default=None,
              help="Verified test set JSON; defaults to the full test split.")
@click.option("--corpus", "corpus_dir", type=click.Path(file_okay=False), default=None,
              help="Corpus directory, enables subtitle exclusion zones.")
@click.option("--auto-detections", "auto_path", type=click.Path(dir_okay=False), default=None,
              help="Pipeline detections used to decide which subtitle occurrences were found.")
@click.option("-o", "--out", "report_path", type=click.Path(dir_okay=False), default=None)
@click.option("--per-class", "per_class_path", type=click.Path(dir_okay=False), default=None)
@_handle_errors
def eval_spotting(
    manifest_dir, predictions, verified_path, corpus_dir, auto_path, report_path,
    per_class_path,
):
    """Score spotting detections with mean average precision."""
    manifest = ds.load_manifest(manifest_dir)
    cfg = manifest.config
    by_id = {a.id: a for a in manifest.annotations}
    if verified_path:
        vset = load_verified_set(verified_path)
        gt_annotations = []
        for entry in vset.entries:
            base = by_id.get(entry.annotation_id)
            if base is None:
                raise ValidationError(
                    f"verified set references unknown annotation {entry.annotation_id!r}"
                )
            gt_annotations.append(dataclasses.replace(base, word=entry.word))
    else:
        gt_annotations = [a for a in manifest.annotations if a.split == "test"]
    if not gt_annotations:
        raise ValidationError("no ground-truth annotations to evaluate against")
    index = {}
    detections_made: set = set()
    if corpus_dir and auto_path:
        corpus = sub.load_corpus(corpus_dir)
        index = corpus.index()
        detections_made = ev.detected_occurrences(
            loc.load_detections(auto_path), index, cfg
        )
    gt = ev.build_spotting_gt(gt_annotations, index, detections_made, cfg)
    preds = ev.load_spotting_predictions(predictions)
    aps = ev.per_class_ap(gt, preds, cfg)
    map_value = sum(aps.values()) / len(aps) if aps else 0.0
    click.echo(f"classes: {len(aps)}")
    click.echo(f"mAP@{cfg.iou_threshold:g}: {map_value:.4f}")
    if report_path:
        report = {
            "map": map_value,
            "iou_threshold": cfg.iou_threshold,
            "classes": len(aps),
            "per_class": aps,
        }
        Path(report_path).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    if per_class_path:
        rows = ["word,ap,positives"]
        for word in sorted(aps):
            n_pos = sum(
                len(v) for (ep, w), v in gt.positives.items() if w == word
            )
            rows.append(f"{word},{aps[word]:.6f},{n_pos}")
        Path(per_class_path).write_text("\n".join(rows) + "\n", encoding="utf-8")


@main.command()
@click.option("--config", "synth_config_path", type=click.Path(dir_okay=False), default=None,
              help="Synthetic-corpus config (key = value).")
@click.option("--pipeline-config", "pipeline_config_path", type=click.Path(dir_okay=False),
              default=None, help="Pipeline config used to cut windows and posterior streams.")
@click.option("-o", "--out", "out_dir", required=True, type=click.Path(file_okay=False))
@_handle_errors
def synth(synth_config_path, pipeline_config_path, out_dir):
    """Generate a synthetic sandbox with known ground truth."""
    synth_cfg = (
        sy.load_synth_config(synth_config_path) if synth_config_path else sy.SynthConfig()
    )
    pipeline_cfg = _load_cfg(pipeline_config_path)
    world = sy.generate(synth_cfg)
    vocabulary = vb.Vocabulary(words=tuple(world.vocab))
    windows = loc.propose_windows(
        vocabulary, world.corpus.index(), world.corpus.episodes, pipeline_cfg
    )
    streams = sy.synth_posteriors(world.gt, windows, synth_cfg, pipeline_cfg)
    sy.write_sandbox(world, streams, out_dir)
    n_signs = sum(len(v) for v in world.gt.signs.values())
    n_mouthed = sum(1 for _ep, s in world.gt.all_signs() if s.mouthed)
    click.echo(
        f"{len(world.corpus.episodes)} episodes, {n_signs} signs "
        f"({n_mouthed} mouthed), {len(streams)} posterior streams -> {out_dir}"
    )


@main.command("synth-score")
@click.argument("sandbox_dir", type=click.Path(file_okay=False))
@click.argument("detections_path", type=click.Path(dir_okay=False))
@click.option("--tolerance", type=float, default=0.5, show_default=True,
              help="Max |peak - mouthing end| in seconds for a correct detection.")
@_handle_errors
def synth_score(sandbox_dir, detections_path, tolerance):
    """Score detections against a sandbox's generator ground truth."""
    gt = sy.load_ground_truth(Path(sandbox_dir) / "ground_truth.jsonl")
    detections = loc.load_detections(detections_path)
    score = sy.score_pipeline(detections, gt, tolerance_s=tolerance)
    click.echo(f"recall {score.recall:.4f}")
    click.echo(f"precision {score.precision:.4f}")
    click.echo(f"recall_mouthed {score.recall_mouthed:.4f}")
    click.echo(f"mean_abs_error_s {score.mean_abs_error_s:.6f}")
    click.echo(f"max_frame_error {score.max_frame_error}")
    click.echo(
        f"signs {score.n_signs} mouthed {score.n_mouthed} "
        f"detections {score.n_detections} matched {score.n_matched}"
    )


@main.command()
@click.argument("manifest_dir", type=click.Path(file_okay=False))
@click.option("--media-dir", envvar="SIGNFORGE_MEDIA_DIR", default=None,
              type=click.Path(file_okay=False))
@click.option("--addr", envvar="SIGNFORGE_ADDR", default="127.0.0.1:8080", show_default=True,
              help="host:port to listen on (:PORT binds all interfaces).")
@click.option("--store", "store_path", default=None, type=click.Path(dir_okay=False),
              help="Verdict store JSON Lines [default: <manifest>/verdicts.jsonl].")
@click.option("--static-dir", default=None, type=click.Path(file_okay=False),
              help="Directory with the built review UI, served at /.")
@_handle_errors
def serve(manifest_dir, media_dir, addr, store_path, static_dir):
    """Run the verification HTTP service."""
    import uvicorn

    manifest = ds.load_manifest(manifest_dir)
    store = store_path or str(Path(manifest_dir) / "verdicts.jsonl")
    service = VerificationService(manifest, store, media_dir=media_dir)
    app = create_app(service, static_dir=static_dir)
    host, _, port_text = addr.rpartition(":")
    if not port_text.isdigit():
        raise ValidationError(f"--addr must look like host:port, got {addr!r}")
    uvicorn.run(app, host=host or "0.0.0.0", port=int(port_text))


if __name__ == "__main__":
    main()
