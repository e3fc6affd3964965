"""HTTP/JSON boundary for interactive labelling sessions.

The service drives the same session state machine the simulated runner
uses; human answers arrive as label submissions and are relayed through a
``SubmissionOracle``, so the loop sees an oracle either way.  Every state
transition is checkpointed to disk before the response acknowledging it is
sent; a session found on disk but not in memory reports status ``paused``
and resumes transparently on its next work or submission call.

Endpoints (JSON bodies; errors are ``{"code": int, "message": str}``):

    POST /sessions                     create a session over a dataset file
    GET  /sessions/{sid}/work          bootstrap batch or page under review
    POST /sessions/{sid}/labels        submit user labels / corrections
    GET  /sessions/{sid}/status        phase + progress counters
    GET  /sessions/{sid}/report        current (possibly partial) report
    GET  /sessions/{sid}/frames/{fid}/spectrogram.png
"""

from __future__ import annotations

import io
import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.image
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from .dataset import Dataset, load_dataset
from .errors import ProtocolError
from .features import rasterize
from .oracle import AuditLog, OracleRequest, SubmissionOracle
from .registry import MOD_SCHEMES, SIGNAL_CLASSES, CoupletLabel
from .session import LabelSession, LoopConfig

CONSTELLATION_POINTS = 256

_STATUS_BY_PHASE = {
    "bootstrap_pending": "bootstrapping",
    "bootstrap_selected": "bootstrapping",
    "ready": "training",
    "page_outstanding": "awaiting_review",
    "post_review": "training",
    "complete": "complete",
}


class CreateSessionRequest(BaseModel):
    dataset: str
    config: dict = {}
    rng_seed: int = 0


class LabelItem(BaseModel):
    frame_id: int
    modulation: str
    signal: str


class SubmitLabelsRequest(BaseModel):
    labels: list[LabelItem]


@dataclass
class SessionRuntime:
    session_id: str
    dataset_name: str
    dataset: Dataset
    session: LabelSession
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def status(self) -> str:
        return _STATUS_BY_PHASE[self.session.phase]


def _progress(session: LabelSession) -> dict:
    counts = session.counts()
    return {
        **counts,
        "buffer_fill": len(session.buffer),
        "buffer_capacity": session.config.buffer_capacity,
        "restarts": session.restarts,
        "iteration": session.iteration,
    }


def _report_payload(session: LabelSession) -> dict:
    report = session.report()
    return {
        "complete": report.complete,
        "total": report.total,
        "model_labelled": report.model_labelled,
        "user_labelled": report.user_labelled,
        "model_label_ratio": (
            report.model_labelled / report.total if report.total else 0.0
        ),
        "restarts": report.restarts,
        "iterations": [
            {
                "iteration": r.iteration,
                "model_correct_in_page": r.model_correct_in_page,
                "corrections": r.corrections,
                "buffer_size": r.buffer_size,
                "retrains": r.retrains,
                "train_time": r.train_time,
                "model_cum": r.model_cum,
                "user_cum": r.user_cum,
            }
            for r in report.records
        ],
        "train_events": [
            {
                "round": t.round,
                "kind": t.kind,
                "n_samples": t.n_samples,
                "n_classes": t.n_classes,
                "seconds": t.seconds,
            }
            for t in report.train_events
        ],
    }


def create_app(dataset_dir: str | Path, checkpoint_dir: str | Path) -> FastAPI:
    dataset_dir = Path(dataset_dir)
    checkpoint_dir = Path(checkpoint_dir)
    checkpoint_dir.mkdir(parents=True, exist_ok=True)

    app = FastAPI(title="rflabel labelling service")
    runtimes: dict[str, SessionRuntime] = {}
    registry_lock = threading.Lock()

    @app.exception_handler(HTTPException)
    async def _http_error(_req: Request, exc: HTTPException):
        return JSONResponse(status_code=exc.status_code,
                            content={"code": exc.status_code, "message": str(exc.detail)})

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_req: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422,
                            content={"code": 422, "message": str(exc.errors())})

    def _checkpoint_path(sid: str) -> Path:
        return checkpoint_dir / f"{sid}.json"

    def _save(rt: SessionRuntime) -> None:
        doc = {
            "session_id": rt.session_id,
            "dataset": rt.dataset_name,
            "session": rt.session.to_checkpoint(),
        }
        tmp = _checkpoint_path(rt.session_id).with_suffix(".tmp")
        with open(tmp, "w") as fh:
            json.dump(doc, fh, sort_keys=True)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, _checkpoint_path(rt.session_id))

    def _load_dataset(name: str) -> Dataset:
        path = dataset_dir / name
        if not path.is_file():
            raise HTTPException(404, f"dataset {name!r} not found")
        return load_dataset(path)

    def _resume(sid: str) -> SessionRuntime:
        path = _checkpoint_path(sid)
        if not path.is_file():
            raise HTTPException(404, f"unknown session {sid!r}")
        with open(path) as fh:
            doc = json.load(fh)
        rt = SessionRuntime(
            session_id=sid,
            dataset_name=doc["dataset"],
            dataset=_load_dataset(doc["dataset"]),
            session=LabelSession.from_checkpoint(doc["session"]),
        )
        runtimes[sid] = rt
        return rt

    def _get(sid: str) -> SessionRuntime:
        with registry_lock:
            rt = runtimes.get(sid)
            if rt is None:
                rt = _resume(sid)
        return rt

    def _audit(sid: str) -> AuditLog:
        return AuditLog(checkpoint_dir / f"{sid}.audit.jsonl")

    def _frame_payload(rt: SessionRuntime, frame_id: int, model_label, confidence):
        frame = rt.dataset.by_id()[frame_id]
        stride = max(1, len(frame.samples) // CONSTELLATION_POINTS)
        pts = frame.samples[::stride][:CONSTELLATION_POINTS]
        return {
            "frame_id": frame_id,
            "snr_db": frame.snr_db,
            "constellation": [[round(float(p.real), 4), round(float(p.imag), 4)] for p in pts],
            "spectrogram": f"/sessions/{rt.session_id}/frames/{frame_id}/spectrogram.png",
            "model_label": None if model_label is None else {
                "modulation": model_label.modulation,
                "signal": model_label.signal,
            },
            "confidence": confidence,
        }

    def _work_payload(rt: SessionRuntime) -> dict:
        session = rt.session
        choices = sorted(str(c) for c in set(rt.dataset.spec.couplets))
        base = {
            "session_id": rt.session_id,
            "status": rt.status,
            "couplets": choices,
            "modulations": sorted(MOD_SCHEMES),
            "signals": sorted(SIGNAL_CLASSES),
        }
        if session.phase == "bootstrap_selected":
            items = [_frame_payload(rt, fid, None, None) for fid in session.pending_bootstrap]
            return {**base, "phase": "bootstrap", "page_index": None, "items": items}
        if session.phase == "page_outstanding":
            items = [
                _frame_payload(rt, it.frame_id, it.model_label, it.confidence)
                for it in session.outstanding.items
            ]
            return {**base, "phase": "review", "page_index": session.outstanding.page_index,
                    "items": items}
        raise HTTPException(409, f"no work in status {rt.status!r}")

    def _advance(rt: SessionRuntime) -> None:
        """After labels are applied: flush, restart check, next page."""
        session = rt.session
        if session.phase == "post_review":
            session.maybe_flush_buffer()
            session.check_restart()
        if session.phase == "bootstrap_pending":
            session.select_bootstrap(partial=True)
        elif session.phase == "ready":
            session.predict_page()

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionRequest):
        dataset = _load_dataset(body.dataset)
        try:
            config = LoopConfig(**body.config).validate()
            session = LabelSession(dataset, config, rng_seed=body.rng_seed)
        except (TypeError, ValueError) as exc:
            raise HTTPException(422, f"bad session config: {exc}")
        sid = uuid.uuid4().hex[:12]
        rt = SessionRuntime(session_id=sid, dataset_name=body.dataset,
                            dataset=dataset, session=session)
        session.select_bootstrap(partial=True)
        with registry_lock:
            runtimes[sid] = rt
        _save(rt)
        return {"session_id": sid, "status": rt.status, "progress": _progress(session)}

    @app.get("/sessions/{sid}/work")
    def get_work(sid: str):
        rt = _get(sid)
        with rt.lock:
            return _work_payload(rt)

    @app.post("/sessions/{sid}/labels")
    def submit_labels(sid: str, body: SubmitLabelsRequest):
        rt = _get(sid)
        with rt.lock:
            session = rt.session
            try:
                submitted = {
                    item.frame_id: CoupletLabel(item.modulation, item.signal)
                    for item in body.labels
                }
            except Exception as exc:
                raise HTTPException(422, f"bad label: {exc}")
            oracle = SubmissionOracle(submitted=submitted, audit=_audit(sid))

            if session.phase == "bootstrap_selected":
                pending = set(session.pending_bootstrap)
                if set(submitted) != pending:
                    raise HTTPException(
                        422,
                        "bootstrap submission must label the whole batch "
                        f"(expected frames {sorted(pending)})",
                    )
                responses = oracle.label_many(
                    [OracleRequest(frame_id=fid) for fid in session.pending_bootstrap]
                )
                try:
                    session.apply_bootstrap({r.frame_id: r.label for r in responses})
                except (ValueError, ProtocolError) as exc:
                    raise HTTPException(422, str(exc))
            elif session.phase == "page_outstanding":
                page_ids = set(session.outstanding.frame_ids())
                unknown = set(submitted) - page_ids
                if unknown:
                    raise HTTPException(
                        422, f"labels reference frames not on the page: {sorted(unknown)}"
                    )
                responses = oracle.label_many(
                    [
                        OracleRequest(frame_id=it.frame_id, model_label=it.model_label)
                        for it in session.outstanding.items
                    ]
                )
                corrections = {
                    r.frame_id: r.label
                    for r, it in zip(responses, session.outstanding.items)
                    if r.label != it.model_label
                }
                try:
                    session.review_page(corrections)
                except (ValueError, ProtocolError) as exc:
                    raise HTTPException(422, str(exc))
            else:
                raise HTTPException(409, f"cannot submit labels in status {rt.status!r}")

            _advance(rt)
            _save(rt)
            return {"session_id": sid, "status": rt.status, "progress": _progress(session)}

    @app.get("/sessions/{sid}/status")
    def get_status(sid: str):
        with registry_lock:
            rt = runtimes.get(sid)
        if rt is None:
            # on disk but not in memory: paused; it resumes on first use
            if _checkpoint_path(sid).is_file():
                return {"session_id": sid, "status": "paused"}
            raise HTTPException(404, f"unknown session {sid!r}")
        with rt.lock:
            return {"session_id": sid, "status": rt.status, "progress": _progress(rt.session)}

    @app.get("/sessions/{sid}/report")
    def get_report(sid: str):
        rt = _get(sid)
        with rt.lock:
            return {"session_id": sid, "status": rt.status, **_report_payload(rt.session)}

    @app.get("/sessions/{sid}/frames/{frame_id}/spectrogram.png")
    def get_spectrogram(sid: str, frame_id: int):
        rt = _get(sid)
        frames = rt.dataset.by_id()
        if frame_id not in frames:
            raise HTTPException(404, f"unknown frame {frame_id}")
        grid = rasterize(frames[frame_id])
        buf = io.BytesIO()
        matplotlib.image.imsave(buf, grid.pixels, cmap="viridis", format="png")
        return Response(content=buf.getvalue(), media_type="image/png")

    return app
