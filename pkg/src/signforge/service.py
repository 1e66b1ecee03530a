"""Human-verification workflow: verdict store, review queue, verified set."""

from __future__ import annotations

import json
import mimetypes
import threading
import time
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from signforge.core import ValidationError
from signforge.dataset import Annotation, DatasetManifest

STATUSES = ("correct", "incorrect", "unsure")
FLUENCIES = ("native", "non_native")


class UnknownAnnotationError(KeyError):
    """Verdict for an annotation id the manifest does not contain."""


@dataclass(frozen=True)
class Verdict:
    annotation_id: str
    status: str
    annotator_id: str
    fluency: str = "non_native"
    correction: str | None = None
    timestamp: float = 0.0

    def __post_init__(self) -> None:
        if self.status not in STATUSES:
            raise ValidationError(f"status must be one of {STATUSES}, got {self.status!r}")
        if self.fluency not in FLUENCIES:
            raise ValidationError(f"fluency must be one of {FLUENCIES}, got {self.fluency!r}")
        if not self.annotator_id:
            raise ValidationError("annotator_id must be non-empty")
        if self.correction is not None and self.status != "incorrect":
            raise ValidationError("a correction is only allowed with an incorrect verdict")

    def to_record(self) -> dict:
        return {
            "annotation_id": self.annotation_id,
            "status": self.status,
            "annotator_id": self.annotator_id,
            "fluency": self.fluency,
            "correction": self.correction,
            "timestamp": self.timestamp,
        }


@dataclass(frozen=True)
class VerifiedEntry:
    annotation_id: str
    word: str
    provenance: str  # verified_as_is | corrected


@dataclass
class VerifiedTestSet:
    entries: list[VerifiedEntry]

    def to_dict(self) -> dict:
        return {
            "entries": [
                {"annotation_id": e.annotation_id, "word": e.word, "provenance": e.provenance}
                for e in self.entries
            ]
        }


class VerificationService:
    """Queue of high-confidence test annotations plus an append-only verdict log.

    Submissions are serialized through one lock and appended to a JSON
    Lines store; the newest verdict per (annotation, annotator) wins.
    """

    def __init__(
        self,
        manifest: DatasetManifest,
        store_path: str | Path,
        media_dir: str | Path | None = None,
        clock=time.time,
    ) -> None:
        self.manifest = manifest
        self.store_path = Path(store_path)
        self.media_dir = Path(media_dir) if media_dir is not None else None
        self._clock = clock
        self._lock = threading.Lock()
        self._annotations = {a.id: a for a in manifest.annotations}
        self._verdicts: list[Verdict] = []
        if self.store_path.exists():
            for lineno, line in enumerate(
                self.store_path.read_text(encoding="utf-8").splitlines(), 1
            ):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValidationError(
                        f"{self.store_path} line {lineno}: invalid JSON ({exc})"
                    ) from None
                self._verdicts.append(
                    Verdict(
                        annotation_id=rec["annotation_id"],
                        status=rec["status"],
                        annotator_id=rec["annotator_id"],
                        fluency=rec.get("fluency", "non_native"),
                        correction=rec.get("correction"),
                        timestamp=float(rec.get("timestamp", 0.0)),
                    )
                )

    def queue_universe(self) -> list[Annotation]:
        t = self.manifest.config.verification_queue_threshold
        eligible = [
            a
            for a in self.manifest.annotations
            if a.split == "test" and a.confidence > t
        ]
        eligible.sort(key=lambda a: (-a.confidence, a.id))
        return eligible

    def queue_for(self, annotator_id: str) -> list[Annotation]:
        """The annotator's remaining queue, best-confidence first."""
        done = {
            aid
            for (aid, ann) in self._effective()
            if ann == annotator_id
        }
        return [a for a in self.queue_universe() if a.id not in done]

    def next_item(self, annotator_id: str) -> Annotation | None:
        queue = self.queue_for(annotator_id)
        return queue[0] if queue else None

    def submit(self, verdict: Verdict) -> Verdict:
        if verdict.annotation_id not in self._annotations:
            raise UnknownAnnotationError(verdict.annotation_id)
        if verdict.correction is not None and verdict.correction not in self.manifest.vocabulary:
            raise ValidationError(
                f"correction {verdict.correction!r} is not a vocabulary word"
            )
        if verdict.timestamp == 0.0:
            verdict = Verdict(
                annotation_id=verdict.annotation_id,
                status=verdict.status,
                annotator_id=verdict.annotator_id,
                fluency=verdict.fluency,
                correction=verdict.correction,
                timestamp=float(self._clock()),
            )
        with self._lock:
            with self.store_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(verdict.to_record()) + "\n")
            self._verdicts.append(verdict)
        return verdict

    def _effective(self) -> dict[tuple[str, str], Verdict]:
        """Newest verdict per (annotation, annotator), in store order."""
        eff: dict[tuple[str, str], Verdict] = {}
        for v in self._verdicts:
            eff[(v.annotation_id, v.annotator_id)] = v
        return eff

    def build_verified_set(
        self, accept_corrections: bool = True, native_only: bool = False
    ) -> VerifiedTestSet:
        """Resolve verdicts into the final relabeled test set.

        Per annotation, native verdicts outrank non-native ones; within
        the deciding group, unsure votes abstain and the majority wins.
        A majority-incorrect annotation survives only as a corrected
        entry (most common correction, ties broken alphabetically) when
        corrections are accepted. Split majorities drop the annotation.
        """
        by_annotation: dict[str, list[Verdict]] = {}
        for v in self._effective().values():
            if native_only and v.fluency != "native":
                continue
            by_annotation.setdefault(v.annotation_id, []).append(v)
        entries = []
        for aid in sorted(by_annotation):
            group = by_annotation[aid]
            natives = [v for v in group if v.fluency == "native"]
            deciders = natives if natives else group
            votes = [v for v in deciders if v.status != "unsure"]
            if not votes:
                continue
            n_correct = sum(1 for v in votes if v.status == "correct")
            n_incorrect = len(votes) - n_correct
            if n_correct > n_incorrect:
                entries.append(
                    VerifiedEntry(aid, self._annotations[aid].word, "verified_as_is")
                )
            elif n_incorrect > n_correct and accept_corrections:
                corrections = Counter(
                    v.correction for v in votes if v.correction is not None
                )
                if corrections:
                    best = min(
                        corrections, key=lambda w: (-corrections[w], w)
                    )
                    entries.append(VerifiedEntry(aid, best, "corrected"))
        return VerifiedTestSet(entries=entries)

    def stats(self) -> dict:
        """Queue and verdict counters for the review dashboard.

        `queued` counts queue items no annotator has judged yet; the
        remaining counters tally effective per-annotator verdicts.
        """
        eff = self._effective()
        judged = {aid for (aid, _annotator) in eff}
        counts = Counter(v.status for v in eff.values())
        return {
            "queued": sum(1 for a in self.queue_universe() if a.id not in judged),
            "verified_correct": counts.get("correct", 0),
            "verified_incorrect": counts.get("incorrect", 0),
            "unsure": counts.get("unsure", 0),
        }

    def media_file(self, annotation_id: str) -> Path | None:
        if self.media_dir is None or annotation_id not in self._annotations:
            return None
        matches = sorted(
            p for p in self.media_dir.glob(f"{annotation_id}.*") if p.is_file()
        )
        return matches[0] if matches else None


def save_verified_set(vset: VerifiedTestSet, path: str | Path) -> None:
    Path(path).write_text(json.dumps(vset.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_verified_set(path: str | Path) -> VerifiedTestSet:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    return VerifiedTestSet(
        entries=[
            VerifiedEntry(e["annotation_id"], e["word"], e.get("provenance", "verified_as_is"))
            for e in data["entries"]
        ]
    )


def create_app(service: VerificationService, static_dir: str | Path | None = None):
    """HTTP facade over a VerificationService (JSON under /api)."""
    from fastapi import FastAPI, HTTPException, Query, Response
    from fastapi.responses import FileResponse, JSONResponse
    from pydantic import BaseModel

    class VerdictIn(BaseModel):
        annotation_id: str
        status: str
        annotator_id: str
        fluency: str = "non_native"
        correction: str | None = None

    app = FastAPI(title="sign verification service")

    @app.get("/api/queue/next")
    def queue_next(annotator: str = Query(..., min_length=1)):
        item = service.next_item(annotator)
        if item is None:
            return Response(status_code=204)
        return {
            "annotation_id": item.id,
            "word": item.word,
            "episode_id": item.episode_id,
            "start_s": item.interval.start,
            "end_s": item.interval.end,
            "confidence": item.confidence,
            "media_url": f"/media/{item.id}",
        }

    # The module uses postponed annotations, which would turn `VerdictIn`
    # into a string FastAPI cannot resolve for a function-local class, so
    # the body annotation is attached as a live object after definition.
    def post_verdict(body):
        try:
            verdict = Verdict(
                annotation_id=body.annotation_id,
                status=body.status,
                annotator_id=body.annotator_id,
                fluency=body.fluency,
                correction=body.correction,
            )
            service.submit(verdict)
        except UnknownAnnotationError:
            raise HTTPException(404, f"unknown annotation {body.annotation_id!r}") from None
        except ValidationError as exc:
            raise HTTPException(400, str(exc)) from None
        return {"annotation_id": body.annotation_id, "recorded": True}

    post_verdict.__annotations__ = {"body": VerdictIn}
    app.post("/api/verdicts", status_code=201)(post_verdict)

    @app.get("/api/stats")
    def get_stats():
        return service.stats()

    @app.get("/api/vocab")
    def get_vocab():
        return {"words": list(service.manifest.vocabulary)}

    @app.get("/api/verified-set")
    def get_verified_set(accept_corrections: bool = True, native_only: bool = False):
        vset = service.build_verified_set(
            accept_corrections=accept_corrections, native_only=native_only
        )
        return JSONResponse(vset.to_dict())

    @app.get("/media/{annotation_id}")
    def get_media(annotation_id: str):
        path = service.media_file(annotation_id)
        if path is None:
            raise HTTPException(404, "no media for this annotation")
        ctype = mimetypes.guess_type(path.name)[0] or "application/octet-stream"
        return FileResponse(path, media_type=ctype)

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app
