"""Gaussian naive Bayes with log-space posterior evaluation.

Per-class feature likelihoods are independent Gaussians fitted by maximum
likelihood; a smoothing floor of 1e-9 times the largest per-dimension data
variance keeps degenerate dimensions finite.  Posteriors are computed in log
space and normalized with log-sum-exp, so extreme queries cannot underflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..registry import CoupletLabel
from .base import labels_from_strings, labels_to_strings, serialize_model

VAR_SMOOTHING = 1e-9


@dataclass
class NbModel:
    classes: list[CoupletLabel]  # sorted by label string
    priors: np.ndarray           # (k,)
    means: np.ndarray            # (k, d)
    variances: np.ndarray        # (k, d), floored

    def posterior(self, x: np.ndarray) -> np.ndarray:
        return nb_posterior(self, x)

    def predict(self, x: np.ndarray) -> CoupletLabel:
        return self.classes[int(np.argmax(nb_posterior(self, x)))]

    def predict_batch(self, X: np.ndarray) -> list[CoupletLabel]:
        return [self.predict(row) for row in np.atleast_2d(X)]

    def to_payload(self) -> dict:
        return {
            "classes": labels_to_strings(self.classes),
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
        }

    def dumps(self) -> bytes:
        return serialize_model("nb", self.to_payload())

    @classmethod
    def from_payload(cls, payload: dict) -> "NbModel":
        return cls(
            classes=labels_from_strings(payload["classes"]),
            priors=np.asarray(payload["priors"], dtype=float),
            means=np.asarray(payload["means"], dtype=float),
            variances=np.asarray(payload["variances"], dtype=float),
        )


def nb_fit(X: np.ndarray, labels) -> NbModel:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    labels = list(labels)
    if len(labels) != X.shape[0]:
        raise ValueError("label count does not match row count")
    classes = sorted(set(labels), key=str)
    floor = VAR_SMOOTHING * float(np.max(X.var(axis=0))) if X.shape[0] > 1 else 0.0
    floor = max(floor, 1e-12)
    priors = np.empty(len(classes))
    means = np.empty((len(classes), X.shape[1]))
    variances = np.empty_like(means)
    for i, lab in enumerate(classes):
        rows = X[np.array([l == lab for l in labels])]
        if rows.shape[0] < 2:
            raise ValueError(f"class {lab} has {rows.shape[0]} point(s); need >= 2 for a variance")
        priors[i] = rows.shape[0] / X.shape[0]
        means[i] = rows.mean(axis=0)
        variances[i] = rows.var(axis=0) + floor
    return NbModel(classes=classes, priors=priors, means=means, variances=variances)


def nb_log_joint(model: NbModel, x: np.ndarray) -> np.ndarray:
    """log prior + log Gaussian likelihood for each class (unnormalized)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.means.shape[1],):
        raise ValueError(f"query dimension {x.shape} != {model.means.shape[1]}")
    log_lik = -0.5 * np.sum(
        np.log(2 * np.pi * model.variances) + (x - model.means) ** 2 / model.variances,
        axis=1,
    )
    return np.log(model.priors) + log_lik


def nb_posterior(model: NbModel, x: np.ndarray) -> np.ndarray:
    """Normalized per-class posterior probabilities, in model.classes order."""
    log_joint = nb_log_joint(model, x)
    shifted = log_joint - np.max(log_joint)
    weights = np.exp(shifted)
    return weights / np.sum(weights)
