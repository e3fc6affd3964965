"""Brute-force k-nearest-neighbour classifier.

Neighbour selection sorts by (distance, training index) so boundary ties at
the k-th neighbour are deterministic.  Vote ties break by smallest mean
neighbour distance, then by lexicographically smallest label string.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..registry import CoupletLabel
from .base import labels_from_strings, labels_to_strings, serialize_model


@dataclass
class KnnModel:
    points: np.ndarray
    labels: list[CoupletLabel]
    k: int

    def predict(self, x: np.ndarray) -> CoupletLabel:
        return knn_predict(self, x)

    def predict_batch(self, X: np.ndarray) -> list[CoupletLabel]:
        return [knn_predict(self, row) for row in np.atleast_2d(X)]

    def to_payload(self) -> dict:
        return {
            "points": self.points.tolist(),
            "labels": labels_to_strings(self.labels),
            "k": self.k,
        }

    def dumps(self) -> bytes:
        return serialize_model("knn", self.to_payload())

    @classmethod
    def from_payload(cls, payload: dict) -> "KnnModel":
        return cls(
            points=np.asarray(payload["points"], dtype=float),
            labels=labels_from_strings(payload["labels"]),
            k=int(payload["k"]),
        )


def knn_fit(X: np.ndarray, labels, k: int = 5) -> KnnModel:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    labels = list(labels)
    if len(labels) == 0:
        raise ValueError("empty training set")
    if not 1 <= k <= len(labels):
        raise ValueError(f"k must be in [1, {len(labels)}], got {k}")
    return KnnModel(points=X.copy(), labels=labels, k=k)


def knn_predict(model: KnnModel, x: np.ndarray) -> CoupletLabel:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.points.shape[1],):
        raise ValueError(f"query dimension {x.shape} != {model.points.shape[1]}")
    dists = np.sqrt(np.sum((model.points - x) ** 2, axis=1))
    order = np.lexsort((np.arange(len(dists)), dists))[: model.k]
    votes: dict[CoupletLabel, list[float]] = {}
    for idx in order:
        votes.setdefault(model.labels[idx], []).append(float(dists[idx]))
    # (most votes, smallest mean distance, smallest label string) wins
    best = min(votes.items(), key=lambda kv: (-len(kv[1]), float(np.mean(kv[1])), str(kv[0])))
    return best[0]


def select_k(X: np.ndarray, labels, candidates=(1, 3, 5, 7, 9), n_folds: int = 3,
             seed: int = 0) -> int:
    """Pick k by stratified cross-validated accuracy; ties favour smaller k."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    labels = list(labels)
    rng = np.random.default_rng(seed)
    folds = np.zeros(len(labels), dtype=int)
    for lab in sorted(set(labels), key=str):
        idx = np.flatnonzero([l == lab for l in labels])
        idx = rng.permutation(idx)
        folds[idx] = np.arange(len(idx)) % n_folds
    usable = [k for k in candidates if k <= len(labels) - max(np.bincount(folds))]
    scores = {}
    for k in usable:
        hits = 0
        for f in range(n_folds):
            tr, te = folds != f, folds == f
            if not te.any() or k > tr.sum():
                continue
            model = knn_fit(X[tr], [l for l, m in zip(labels, tr) if m], k)
            hits += sum(model.predict(row) == lab
                        for row, lab in zip(X[te], [l for l, m in zip(labels, te) if m]))
        scores[k] = hits
    if not scores:
        raise ValueError("no usable k candidate for this training set")
    return min(scores, key=lambda k: (-scores[k], k))
