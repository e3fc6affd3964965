"""Labelling authorities: the interface the session loop asks for labels.

``SimulatedOracle`` answers from ground truth, optionally flipping each
answer to a uniformly random wrong couplet with probability ``error_rate``;
its randomness is hashed per frame id, so answers do not depend on request
order and sessions replay exactly.  ``SubmissionOracle`` wraps one batch of
human submissions relayed by the HTTP service: it only ever echoes a
received submission (or the reviewed model proposal), never inventing a
label, and every response can be audit-logged.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import derive_seed
from .registry import CoupletLabel

_FLIP_STREAM = 7


@dataclass(frozen=True)
class OracleRequest:
    frame_id: int
    features: np.ndarray | None = None
    model_label: CoupletLabel | None = None  # absent during bootstrap
    image_ref: str | None = None


@dataclass(frozen=True)
class OracleResponse:
    frame_id: int
    label: CoupletLabel
    latency: float = 0.0


class LabelOracle:
    """Interface: exactly one response per request."""

    def label(self, request: OracleRequest) -> OracleResponse:
        raise NotImplementedError

    def label_many(self, requests) -> list[OracleResponse]:
        return [self.label(r) for r in requests]

    def strata(self, frame_ids) -> dict[int, CoupletLabel] | None:
        """Ground-truth strata for bootstrap stratification, when known."""
        return None


@dataclass
class SimulatedOracle(LabelOracle):
    truth: dict[int, CoupletLabel]
    couplets: tuple[CoupletLabel, ...]
    error_rate: float = 0.0
    seed: int = 0
    audit: "AuditLog | None" = None

    def label(self, request: OracleRequest) -> OracleResponse:
        try:
            answer = self.truth[request.frame_id]
        except KeyError:
            raise ValueError(f"unknown frame id {request.frame_id}") from None
        if self.error_rate > 0.0:
            rng = np.random.default_rng(derive_seed(self.seed, _FLIP_STREAM, request.frame_id))
            if rng.random() < self.error_rate:
                wrong = [c for c in self.couplets if c != answer]
                answer = wrong[int(rng.integers(len(wrong)))]
        if self.audit is not None:
            self.audit.append(request.frame_id, answer, source="simulated")
        return OracleResponse(frame_id=request.frame_id, label=answer)

    def strata(self, frame_ids) -> dict[int, CoupletLabel]:
        return {fid: self.truth[fid] for fid in frame_ids}


@dataclass
class SubmissionOracle(LabelOracle):
    """One batch of relayed human answers; implicit accepts echo the proposal."""

    submitted: dict[int, CoupletLabel]
    audit: "AuditLog | None" = None

    def label(self, request: OracleRequest) -> OracleResponse:
        if request.frame_id in self.submitted:
            answer = self.submitted[request.frame_id]
        elif request.model_label is not None:
            answer = request.model_label  # reviewed and left unchanged
        else:
            raise ValueError(f"no submission for frame {request.frame_id} and nothing to accept")
        if self.audit is not None:
            self.audit.append(request.frame_id, answer, source="user")
        return OracleResponse(frame_id=request.frame_id, label=answer)


class AuditLog:
    """Append-only JSON-lines trail of oracle responses."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, frame_id: int, label: CoupletLabel, source: str) -> None:
        entry = {
            "timestamp": time.time(),
            "frame_id": int(frame_id),
            "label": str(label),
            "source": source,
        }
        with open(self.path, "a") as fh:
            fh.write(json.dumps(entry) + "\n")

    def entries(self) -> list[dict]:
        if not self.path.exists():
            return []
        with open(self.path) as fh:
            return [json.loads(line) for line in fh if line.strip()]
