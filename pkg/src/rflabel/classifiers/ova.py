"""One-vs-all ensemble with independent, individually trainable scorers.

Each class owns one binary scorer (logistic by default, or an RBF-SVM with
a Platt-style sigmoid calibration); training or adding one class never
touches the other scorers, so their serialized bytes stay identical.  A
single-class ensemble degrades to the positives-only logistic fit whatever
the configured kind.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..registry import CoupletLabel
from .base import serialize_model
from .logistic import LogisticModel, logistic_fit, _sigmoid
from .svm import SvmModel, SvmParams, svm_fit

SCORER_KINDS = ("logistic", "svm")


@dataclass
class SvmScorer:
    """Binary SVM plus sigmoid calibration mapping margins to [0, 1]."""

    svm: SvmModel
    platt_a: float
    platt_b: float

    def score(self, x: np.ndarray) -> float:
        return float(self.score_batch(np.asarray(x, dtype=float)[None, :])[0])

    def score_batch(self, X: np.ndarray) -> np.ndarray:
        f = self.svm.decision(X)
        return _sigmoid(-(self.platt_a * f + self.platt_b))

    def to_payload(self) -> dict:
        return {"svm": self.svm.to_payload(), "platt_a": self.platt_a, "platt_b": self.platt_b}

    def dumps(self) -> bytes:
        return serialize_model("svm_scorer", self.to_payload())

    @classmethod
    def from_payload(cls, payload: dict) -> "SvmScorer":
        return cls(
            svm=SvmModel.from_payload(payload["svm"]),
            platt_a=float(payload["platt_a"]),
            platt_b=float(payload["platt_b"]),
        )


def _platt_calibrate(f: np.ndarray, y01: np.ndarray, max_iter: int = 100) -> tuple[float, float]:
    """Fit P(y=1|f) = sigmoid(-(A f + B)) on the usual smoothed targets.

    Damped Newton with backtracking line search; plain Newton diverges on
    cleanly separated margins, which are the common case here.
    """
    n_pos = float(np.sum(y01 == 1))
    n_neg = float(np.sum(y01 == 0))
    t = np.where(y01 == 1, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))

    def loss(a_, b_):
        z = a_ * f + b_
        # -(t log p + (1-t) log(1-p)) with p = sigmoid(-z), stably
        return float(np.sum(np.where(z >= 0, t * z + np.log1p(np.exp(-z)),
                                     (t - 1.0) * z + np.log1p(np.exp(z)))))

    a, b = 0.0, float(np.log((n_neg + 1.0) / (n_pos + 1.0)))
    value = loss(a, b)
    for _ in range(max_iter):
        z = a * f + b
        p = _sigmoid(-z)
        w = p * (1.0 - p)
        g_a = float(np.sum(f * (t - p)))
        g_b = float(np.sum(t - p))
        if max(abs(g_a), abs(g_b)) < 1e-10:
            break
        h_aa = float(np.sum(w * f * f)) + 1e-12
        h_ab = float(np.sum(w * f))
        h_bb = float(np.sum(w)) + 1e-12
        det = h_aa * h_bb - h_ab * h_ab
        if abs(det) < 1e-24:
            break
        da = -(h_bb * g_a - h_ab * g_b) / det
        db = -(h_aa * g_b - h_ab * g_a) / det
        decrement = g_a * da + g_b * db  # expected descent, negative
        step = 1.0
        while step >= 1e-10:
            cand = loss(a + step * da, b + step * db)
            if cand < value + 1e-4 * step * decrement:
                a, b = a + step * da, b + step * db
                value = cand
                break
            step *= 0.5
        else:
            break  # no acceptable step: converged as far as it goes
    return a, b


def _fit_scorer(kind: str, X: np.ndarray, y01: np.ndarray, svm_params: SvmParams):
    if y01.min() == y01.max():  # one-class degenerate fit
        return logistic_fit(X, y01)
    if kind == "logistic":
        return logistic_fit(X, y01)
    if kind == "svm":
        model = svm_fit(X, np.where(y01 == 1, 1.0, -1.0), svm_params)
        a, b = _platt_calibrate(model.decision(X), y01)
        return SvmScorer(svm=model, platt_a=a, platt_b=b)
    raise ValueError(f"unknown scorer kind {kind!r}")


def _scorer_payload(scorer) -> dict:
    if isinstance(scorer, LogisticModel):
        return {"kind": "logistic", "payload": scorer.to_payload()}
    return {"kind": "svm_scorer", "payload": scorer.to_payload()}


def _scorer_from_payload(doc: dict):
    if doc["kind"] == "logistic":
        return LogisticModel.from_payload(doc["payload"])
    return SvmScorer.from_payload(doc["payload"])


@dataclass
class OvaEnsemble:
    scorers: dict[CoupletLabel, object] = field(default_factory=dict)
    scorer_kind: str = "logistic"
    svm_params: SvmParams = SvmParams()

    @property
    def classes(self) -> list[CoupletLabel]:
        return sorted(self.scorers, key=str)

    def to_payload(self) -> dict:
        return {
            "scorer_kind": self.scorer_kind,
            "svm_params": {
                "C": self.svm_params.C,
                "gamma": self.svm_params.gamma,
                "tol": self.svm_params.tol,
                "max_passes": self.svm_params.max_passes,
            },
            "scorers": {str(lab): _scorer_payload(s) for lab, s in self.scorers.items()},
        }

    def dumps(self) -> bytes:
        return serialize_model("ova", self.to_payload())

    @classmethod
    def from_payload(cls, payload: dict) -> "OvaEnsemble":
        sp = payload["svm_params"]
        return cls(
            scorers={
                CoupletLabel.parse(lab): _scorer_from_payload(doc)
                for lab, doc in payload["scorers"].items()
            },
            scorer_kind=payload["scorer_kind"],
            svm_params=SvmParams(
                C=sp["C"],
                gamma=sp["gamma"],
                tol=sp["tol"],
                max_passes=int(sp["max_passes"]),
            ),
        )


def ova_fit(X: np.ndarray, labels, scorer_kind: str = "logistic",
            svm_params: SvmParams = SvmParams()) -> OvaEnsemble:
    """Fit one class-vs-rest scorer per distinct label."""
    if scorer_kind not in SCORER_KINDS:
        raise ValueError(f"unknown scorer kind {scorer_kind!r}")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    labels = list(labels)
    if not labels:
        raise ValueError("empty training set")
    ensemble = OvaEnsemble(scorer_kind=scorer_kind, svm_params=svm_params)
    for lab in sorted(set(labels), key=str):
        y01 = np.array([1.0 if l == lab else 0.0 for l in labels])
        ensemble.scorers[lab] = _fit_scorer(scorer_kind, X, y01, svm_params)
    return ensemble


def ova_scores(ensemble: OvaEnsemble, x: np.ndarray) -> dict[CoupletLabel, float]:
    if not ensemble.scorers:
        raise ValueError("ensemble has no trained scorers")
    x = np.asarray(x, dtype=float)
    return {lab: ensemble.scorers[lab].score(x) for lab in ensemble.classes}


def ova_predict(ensemble: OvaEnsemble, x: np.ndarray) -> tuple[CoupletLabel, float]:
    """Argmax scorer output; ties go to the smallest label string."""
    scores = ova_scores(ensemble, x)
    label = min(scores, key=lambda lab: (-scores[lab], str(lab)))
    return label, scores[label]


def ova_add_class(ensemble: OvaEnsemble, new_class: CoupletLabel,
                  positives: np.ndarray, negatives: np.ndarray) -> OvaEnsemble:
    """Train one scorer for a new class; existing scorers are shared untouched."""
    if new_class in ensemble.scorers:
        raise ValueError(f"class {new_class} already present")
    positives = np.atleast_2d(np.asarray(positives, dtype=float))
    negatives = np.atleast_2d(np.asarray(negatives, dtype=float))
    if positives.shape[0] == 0:
        raise ValueError("new class needs at least one sample")
    if negatives.shape[0] == 0:
        raise ValueError("new class needs non-empty negatives")
    X = np.vstack([positives, negatives])
    y01 = np.concatenate([np.ones(len(positives)), np.zeros(len(negatives))])
    out = OvaEnsemble(
        scorers=dict(ensemble.scorers),
        scorer_kind=ensemble.scorer_kind,
        svm_params=ensemble.svm_params,
    )
    out.scorers[new_class] = _fit_scorer(ensemble.scorer_kind, X, y01, ensemble.svm_params)
    return out
