"""Buffer-enabled labelling loop as an explicit, resumable state machine.

Phases::

    bootstrap_pending -> bootstrap_selected -> ready -> page_outstanding
        -> post_review -> (ready | bootstrap_pending | complete)

A session starts with a user-labelled bootstrap batch, then alternates
model-labelled pages with user review.  Corrected samples accumulate in a
bounded buffer; once the buffer overflows, the most informative corrections
(by the configured selection policy) are emphasised and the one-vs-all
ensemble is retrained on every user-labelled sample.  A page with more
incorrect predictions than ``restart_threshold`` sends the session back to
bootstrap on the remaining pool.  Review resolves buffer overflow before it
returns, so the buffer never exceeds capacity between operations.

Training cost is reported through a fixed deterministic cost model
(estimated seconds at a reference throughput) so that a session's report,
checkpoints, and exports are reproducible byte-for-byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .dataset import Dataset, derive_seed
from .errors import ProtocolError
from .features import NormStats, extract_features, fit_normalizer, normalize
from .classifiers.ova import OvaEnsemble, ova_add_class, ova_fit, ova_scores
from .classifiers.svm import SvmParams
from .oracle import LabelOracle, OracleRequest
from .registry import CoupletLabel, validate_couplet

CHECKPOINT_FORMAT = "rflabel-session"
CHECKPOINT_VERSION = 1

SELECTION_POLICIES = ("margin", "entropy", "random")

# reference training throughput for the deterministic cost model
_SECONDS_PER_SAMPLE_CLASS = 2e-5
_SECONDS_PER_EVENT = 0.01

_BOOTSTRAP_STREAM = 10
_FLUSH_STREAM = 11


@dataclass(frozen=True)
class LoopConfig:
    page_size: int = 30
    restart_threshold: int = 15
    buffer_capacity: int = 60
    bootstrap_count: int = 30
    selection_policy: str = "margin"
    max_iterations: int = 1000
    scorer_kind: str = "logistic"

    def validate(self) -> "LoopConfig":
        if self.page_size < 1:
            raise ValueError("page_size must be >= 1")
        if self.restart_threshold > self.page_size:
            raise ValueError("restart_threshold must be <= page_size")
        if self.buffer_capacity < 1:
            raise ValueError("buffer_capacity must be >= 1")
        if self.bootstrap_count < 1:
            raise ValueError("bootstrap_count must be >= 1")
        if self.selection_policy not in SELECTION_POLICIES:
            raise ValueError(f"unknown selection policy {self.selection_policy!r}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        return self


@dataclass(frozen=True)
class PageItem:
    frame_id: int
    model_label: CoupletLabel
    confidence: float
    margin: float    # top1 - top2 ensemble score at prediction time
    entropy: float   # entropy of the normalized score vector


@dataclass(frozen=True)
class Page:
    items: tuple[PageItem, ...]
    page_index: int

    def frame_ids(self) -> list[int]:
        return [item.frame_id for item in self.items]


@dataclass(frozen=True)
class BufferEntry:
    frame_id: int
    model_label: CoupletLabel
    true_label: CoupletLabel
    margin: float
    entropy: float


@dataclass(frozen=True)
class TrainEvent:
    round: int
    kind: str  # bootstrap | flush
    n_samples: int
    n_classes: int
    seconds: float


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    model_correct_in_page: int
    corrections: int
    buffer_size: int
    retrains: int
    train_time: float
    model_cum: int
    user_cum: int


@dataclass(frozen=True)
class SessionReport:
    records: tuple[IterationRecord, ...]
    train_events: tuple[TrainEvent, ...]
    model_labelled: int
    user_labelled: int
    total: int
    restarts: int
    complete: bool

    @property
    def model_label_ratio(self) -> float:
        if self.total == 0:
            raise ValueError("empty session: ratio undefined")
        return self.model_labelled / self.total


def _estimate_train_seconds(n_samples: int, n_classes: int) -> float:
    return _SECONDS_PER_EVENT + _SECONDS_PER_SAMPLE_CLASS * n_samples * n_classes


def _score_stats(scores: dict[CoupletLabel, float]) -> tuple[float, float]:
    """(top1 - top2 margin, entropy of the normalized score vector)."""
    vals = np.array(sorted(scores.values(), reverse=True), dtype=float)
    margin = float(vals[0] - vals[1]) if len(vals) > 1 else float(vals[0])
    total = float(vals.sum())
    if total <= 0.0:
        return margin, 0.0
    p = vals / total
    p = p[p > 0]
    return margin, float(-(p * np.log(p)).sum())


class LabelSession:
    """One labelling session over a fixed dataset."""

    def __init__(self, dataset: Dataset | list, config: LoopConfig = LoopConfig(),
                 rng_seed: int = 0):
        frames = dataset.frames if isinstance(dataset, Dataset) else list(dataset)
        if not frames:
            raise ValueError("dataset is empty")
        self.config = config.validate()
        self.rng_seed = rng_seed
        self.features: dict[int, np.ndarray] = {
            f.id: extract_features(f).values for f in frames
        }
        self.total = len(frames)
        self.pool: list[int] = [f.id for f in frames]
        self.labeled: dict[int, tuple[CoupletLabel, str]] = {}
        self.ensemble: OvaEnsemble | None = None
        self.norm: NormStats | None = None
        self.buffer: list[BufferEntry] = []
        self.iteration = 0
        self.restarts = 0
        self.flush_count = 0
        self.phase = "bootstrap_pending"
        self.pending_bootstrap: list[int] | None = None
        self.outstanding: Page | None = None
        self.last_page_incorrect: int | None = None
        self.records: list[IterationRecord] = []
        self.train_events: list[TrainEvent] = []

    # ---------------------------------------------------------------- helpers

    def _require_phase(self, *phases: str) -> None:
        if self.phase not in phases:
            raise ProtocolError(
                f"operation not allowed in phase {self.phase!r} (expected {' or '.join(phases)})"
            )

    def _counts(self) -> tuple[int, int]:
        user = sum(1 for _, src in self.labeled.values() if src == "user")
        return user, len(self.labeled) - user

    def _user_rows(self) -> tuple[np.ndarray, list[CoupletLabel]]:
        rows, labs = [], []
        for fid, (lab, src) in self.labeled.items():
            if src == "user":
                rows.append(self.features[fid])
                labs.append(lab)
        return np.vstack(rows), labs

    def _finalize(self, frame_id: int, label: CoupletLabel, source: str) -> None:
        if frame_id in self.labeled:
            raise ProtocolError(f"frame {frame_id} already finalized")
        validate_couplet(label)
        self.labeled[frame_id] = (label, source)

    def _train_full(self, kind: str, extra_rows: np.ndarray | None = None,
                    extra_labels: list[CoupletLabel] | None = None) -> float:
        X, labs = self._user_rows()
        if extra_rows is not None and len(extra_rows):
            X = np.vstack([X, extra_rows])
            labs = labs + list(extra_labels or [])
        self.norm = fit_normalizer(X)
        Xn = normalize(X, self.norm)
        self.ensemble = ova_fit(Xn, labs, scorer_kind=self.config.scorer_kind,
                                svm_params=SvmParams())
        self.buffer.clear()
        seconds = _estimate_train_seconds(len(labs), len(self.ensemble.scorers))
        self.train_events.append(
            TrainEvent(round=len(self.train_events) + 1, kind=kind,
                       n_samples=len(labs), n_classes=len(self.ensemble.scorers),
                       seconds=seconds)
        )
        return seconds

    def _scores_for(self, frame_id: int) -> dict[CoupletLabel, float]:
        vec = normalize(self.features[frame_id], self.norm)
        return ova_scores(self.ensemble, vec)

    # ------------------------------------------------------------- bootstrap

    def select_bootstrap(self, strata: dict[int, CoupletLabel] | None = None,
                         partial: bool = False) -> list[int]:
        """Pick the batch the user must label; stratified when strata known."""
        if self.phase == "bootstrap_selected":
            return list(self.pending_bootstrap or [])
        self._require_phase("bootstrap_pending")
        count = self.config.bootstrap_count
        if len(self.pool) < count:
            if not partial:
                raise ValueError(
                    f"pool has {len(self.pool)} frames, bootstrap needs {count}"
                )
            count = len(self.pool)
        rng = np.random.default_rng(derive_seed(self.rng_seed, _BOOTSTRAP_STREAM, self.restarts))
        if strata:
            chosen = self._stratified_draw(count, strata, rng)
        else:
            chosen = sorted(rng.choice(self.pool, size=count, replace=False).tolist())
        pool_rank = {fid: i for i, fid in enumerate(self.pool)}
        self.pending_bootstrap = sorted(chosen, key=pool_rank.__getitem__)
        self.phase = "bootstrap_selected"
        return list(self.pending_bootstrap)

    def _stratified_draw(self, count: int, strata, rng) -> list[int]:
        groups: dict[str, list[int]] = {}
        for fid in self.pool:
            groups.setdefault(str(strata[fid]), []).append(fid)
        names = sorted(groups)
        sizes = np.array([len(groups[g]) for g in names], dtype=float)
        exact = count * sizes / sizes.sum()
        alloc = np.floor(exact).astype(int)
        # hand out the remainder by largest fractional part, then fill any
        # stratum overflow back into strata with spare capacity
        order = sorted(range(len(names)), key=lambda i: (-(exact[i] - alloc[i]), names[i]))
        for i in order:
            if alloc.sum() >= count:
                break
            alloc[i] += 1
        alloc = np.minimum(alloc, sizes.astype(int))
        while alloc.sum() < count:
            spare = [i for i in range(len(names)) if alloc[i] < sizes[i]]
            i = max(spare, key=lambda i: sizes[i] - alloc[i])
            alloc[i] += 1
        chosen: list[int] = []
        for g, take in zip(names, alloc):
            fids = groups[g]
            picked = rng.choice(len(fids), size=int(take), replace=False)
            chosen.extend(fids[int(p)] for p in sorted(picked))
        return chosen

    def apply_bootstrap(self, labels: dict[int, CoupletLabel]) -> None:
        """Finalize user labels for the whole selected batch and train."""
        self._require_phase("bootstrap_selected")
        pending = set(self.pending_bootstrap or [])
        if set(labels) != pending:
            missing = pending - set(labels)
            extra = set(labels) - pending
            raise ValueError(
                f"bootstrap labels must cover the batch exactly "
                f"(missing {sorted(missing)}, unexpected {sorted(extra)})"
            )
        for fid in self.pending_bootstrap:
            self._finalize(fid, labels[fid], "user")
        self.pool = [fid for fid in self.pool if fid not in pending]
        self.pending_bootstrap = None
        self._train_full("bootstrap")
        self.phase = "complete" if not self.pool else "ready"

    def bootstrap(self, oracle: LabelOracle, partial: bool = False) -> None:
        """Oracle-driven bootstrap: select, ask for labels, apply, train."""
        chosen = self.select_bootstrap(strata=oracle.strata(self.pool), partial=partial)
        responses = oracle.label_many(
            [OracleRequest(frame_id=fid, features=self.features[fid]) for fid in chosen]
        )
        self.apply_bootstrap({r.frame_id: r.label for r in responses})

    # ------------------------------------------------------------ page cycle

    def predict_page(self) -> Page:
        if self.ensemble is None:
            raise ProtocolError("ensemble not trained yet; bootstrap first")
        self._require_phase("ready")
        if not self.pool:
            raise ProtocolError("pool is empty")
        ids = self.pool[: self.config.page_size]
        items = []
        for fid in ids:
            scores = self._scores_for(fid)
            label = min(scores, key=lambda lab: (-scores[lab], str(lab)))
            margin, entropy = _score_stats(scores)
            items.append(PageItem(frame_id=fid, model_label=label,
                                  confidence=scores[label], margin=margin,
                                  entropy=entropy))
        self.outstanding = Page(items=tuple(items), page_index=self.iteration)
        self.phase = "page_outstanding"
        return self.outstanding

    def review_page(self, corrections: dict[int, CoupletLabel]) -> int:
        """Apply user review of the outstanding page; returns incorrect count.

        Corrected samples are finalized with the user's label and buffered;
        the rest keep the model label.  Buffer overflow is resolved here,
        before control returns.
        """
        self._require_phase("page_outstanding")
        page = self.outstanding
        page_ids = set(page.frame_ids())
        unknown = set(corrections) - page_ids
        if unknown:
            raise ValueError(f"corrections reference frames not on the page: {sorted(unknown)}")

        effective = {
            fid: lab for fid, lab in corrections.items()
            if lab != next(i.model_label for i in page.items if i.frame_id == fid)
        }
        for item in page.items:
            if item.frame_id in effective:
                true_label = effective[item.frame_id]
                self._finalize(item.frame_id, true_label, "user")
                self.buffer.append(
                    BufferEntry(frame_id=item.frame_id, model_label=item.model_label,
                                true_label=true_label, margin=item.margin,
                                entropy=item.entropy)
                )
            else:
                self._finalize(item.frame_id, item.model_label, "model")
        self.pool = [fid for fid in self.pool if fid not in page_ids]
        self.outstanding = None
        self.iteration += 1
        self.last_page_incorrect = len(effective)

        new_classes = sorted(
            {lab for lab in effective.values() if lab not in self.ensemble.scorers},
            key=str,
        )
        for new_class in new_classes:
            pos, neg = [], []
            for fid, (lab, src) in self.labeled.items():
                if src != "user":
                    continue
                row = normalize(self.features[fid], self.norm)
                (pos if lab == new_class else neg).append(row)
            self.ensemble = ova_add_class(self.ensemble, new_class,
                                          np.vstack(pos), np.vstack(neg))

        self.phase = "post_review"
        train_time = self.maybe_flush_buffer()
        user, model = self._counts()
        self.records.append(
            IterationRecord(
                iteration=self.iteration,
                model_correct_in_page=len(page.items) - len(effective),
                corrections=len(effective),
                buffer_size=len(self.buffer),
                retrains=len(self.train_events),
                train_time=train_time,
                model_cum=model,
                user_cum=user,
            )
        )
        return len(effective)

    def maybe_flush_buffer(self) -> float:
        """Retrain on overflow: select informative corrections, emphasise them
        (duplicated once more), refit on all user-labelled data, clear."""
        self._require_phase("post_review")
        if len(self.buffer) <= self.config.buffer_capacity:
            return 0.0
        selected = self._select_informative()
        extra_rows = np.vstack([self.features[e.frame_id] for e in selected])
        extra_labels = [e.true_label for e in selected]
        seconds = self._train_full("flush", extra_rows, extra_labels)
        self.flush_count += 1
        return seconds

    def _select_informative(self) -> list[BufferEntry]:
        n_sel = math.ceil(len(self.buffer) / 2)
        policy = self.config.selection_policy
        if policy == "margin":
            ranked = sorted(self.buffer, key=lambda e: (e.margin, e.frame_id))
        elif policy == "entropy":
            ranked = sorted(self.buffer, key=lambda e: (-e.entropy, e.frame_id))
        else:
            rng = np.random.default_rng(
                derive_seed(self.rng_seed, _FLUSH_STREAM, self.flush_count)
            )
            idx = sorted(rng.choice(len(self.buffer), size=n_sel, replace=False).tolist())
            return [self.buffer[i] for i in idx]
        return ranked[:n_sel]

    def check_restart(self, last_page_incorrect: int | None = None) -> str:
        """Restart iff the page had strictly more incorrect labels than the
        threshold; returns 'restart' or 'continue' and advances the phase."""
        self._require_phase("post_review")
        incorrect = (
            self.last_page_incorrect if last_page_incorrect is None else last_page_incorrect
        )
        if incorrect is None:
            raise ProtocolError("no reviewed page to evaluate")
        if not self.pool:
            self.phase = "complete"
            return "continue"
        if incorrect > self.config.restart_threshold:
            self.restarts += 1
            self.phase = "bootstrap_pending"
            return "restart"
        self.phase = "ready"
        return "continue"

    # -------------------------------------------------------------- reporting

    def counts(self) -> dict[str, int]:
        user, model = self._counts()
        return {
            "user_labelled": user,
            "model_labelled": model,
            "pool_remaining": len(self.pool),
            "total": self.total,
        }

    def check_conservation(self) -> None:
        if len(self.labeled) + len(self.pool) != self.total:
            raise AssertionError("conservation violated: labels + pool != total")

    def report(self) -> SessionReport:
        user, model = self._counts()
        return SessionReport(
            records=tuple(self.records),
            train_events=tuple(self.train_events),
            model_labelled=model,
            user_labelled=user,
            total=self.total,
            restarts=self.restarts,
            complete=self.phase == "complete",
        )

    # ------------------------------------------------------------- checkpoint

    def to_checkpoint(self) -> dict:
        return {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "config": asdict(self.config),
            "rng_seed": self.rng_seed,
            "total": self.total,
            "phase": self.phase,
            "iteration": self.iteration,
            "restarts": self.restarts,
            "flush_count": self.flush_count,
            "pool": list(self.pool),
            "labeled": {str(fid): [str(lab), src] for fid, (lab, src) in self.labeled.items()},
            "features": {str(fid): vec.tolist() for fid, vec in self.features.items()},
            "buffer": [
                {
                    "frame_id": e.frame_id,
                    "model_label": str(e.model_label),
                    "true_label": str(e.true_label),
                    "margin": e.margin,
                    "entropy": e.entropy,
                }
                for e in self.buffer
            ],
            "pending_bootstrap": self.pending_bootstrap,
            "outstanding": None
            if self.outstanding is None
            else {
                "page_index": self.outstanding.page_index,
                "items": [
                    {
                        "frame_id": i.frame_id,
                        "model_label": str(i.model_label),
                        "confidence": i.confidence,
                        "margin": i.margin,
                        "entropy": i.entropy,
                    }
                    for i in self.outstanding.items
                ],
            },
            "last_page_incorrect": self.last_page_incorrect,
            "records": [asdict(r) for r in self.records],
            "train_events": [asdict(t) for t in self.train_events],
            "norm": None
            if self.norm is None
            else {"mean": self.norm.mean.tolist(), "std": self.norm.std.tolist()},
            "ensemble": None if self.ensemble is None else self.ensemble.to_payload(),
        }

    def save_checkpoint(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_checkpoint(), fh, sort_keys=True)

    @classmethod
    def from_checkpoint(cls, doc: dict) -> "LabelSession":
        if doc.get("format") != CHECKPOINT_FORMAT:
            raise ValueError("not a session checkpoint")
        if doc.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {doc.get('version')}")
        session = cls.__new__(cls)
        session.config = LoopConfig(**doc["config"]).validate()
        session.rng_seed = doc["rng_seed"]
        session.total = doc["total"]
        session.phase = doc["phase"]
        session.iteration = doc["iteration"]
        session.restarts = doc["restarts"]
        session.flush_count = doc["flush_count"]
        session.pool = list(doc["pool"])
        session.labeled = {
            int(fid): (CoupletLabel.parse(lab), src)
            for fid, (lab, src) in doc["labeled"].items()
        }
        session.features = {
            int(fid): np.asarray(vec, dtype=float) for fid, vec in doc["features"].items()
        }
        session.buffer = [
            BufferEntry(
                frame_id=e["frame_id"],
                model_label=CoupletLabel.parse(e["model_label"]),
                true_label=CoupletLabel.parse(e["true_label"]),
                margin=e["margin"],
                entropy=e["entropy"],
            )
            for e in doc["buffer"]
        ]
        session.pending_bootstrap = doc["pending_bootstrap"]
        session.outstanding = None
        if doc["outstanding"] is not None:
            session.outstanding = Page(
                page_index=doc["outstanding"]["page_index"],
                items=tuple(
                    PageItem(
                        frame_id=i["frame_id"],
                        model_label=CoupletLabel.parse(i["model_label"]),
                        confidence=i["confidence"],
                        margin=i["margin"],
                        entropy=i["entropy"],
                    )
                    for i in doc["outstanding"]["items"]
                ),
            )
        session.last_page_incorrect = doc["last_page_incorrect"]
        session.records = [IterationRecord(**r) for r in doc["records"]]
        session.train_events = [TrainEvent(**t) for t in doc["train_events"]]
        session.norm = None
        if doc["norm"] is not None:
            session.norm = NormStats(
                mean=np.asarray(doc["norm"]["mean"], dtype=float),
                std=np.asarray(doc["norm"]["std"], dtype=float),
            )
        session.ensemble = (
            None if doc["ensemble"] is None else OvaEnsemble.from_payload(doc["ensemble"])
        )
        return session

    @classmethod
    def load_checkpoint(cls, path) -> "LabelSession":
        with open(path) as fh:
            return cls.from_checkpoint(json.load(fh))


def drive_session(session: LabelSession, oracle: LabelOracle) -> SessionReport:
    """Run an existing session to completion (or the iteration cap)."""
    while session.phase != "complete":
        if session.phase in ("bootstrap_pending", "bootstrap_selected"):
            session.bootstrap(oracle, partial=True)
            continue
        if len(session.records) >= session.config.max_iterations:
            break  # iteration budget exhausted; report stays flagged incomplete
        page = session.predict_page()
        responses = oracle.label_many(
            [
                OracleRequest(
                    frame_id=item.frame_id,
                    features=session.features[item.frame_id],
                    model_label=item.model_label,
                )
                for item in page.items
            ]
        )
        corrections = {
            r.frame_id: r.label
            for r, item in zip(responses, page.items)
            if r.label != item.model_label
        }
        session.review_page(corrections)
        session.maybe_flush_buffer()
        session.check_restart()
    session.check_conservation()
    return session.report()


def run_session(dataset: Dataset | list, config: LoopConfig, oracle: LabelOracle,
                rng_seed: int = 0) -> SessionReport:
    """Full labelling run: bootstrap, paged review, flushes, restarts."""
    session = LabelSession(dataset, config, rng_seed=rng_seed)
    return drive_session(session, oracle)
