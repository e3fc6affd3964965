"""L2-regularized logistic scorer fitted by Newton iterations.

This is the cheap binary scorer the labelling loop uses by default: class
weights are balanced, the ridge term keeps the Hessian positive definite
(bias included, so one-class degenerate fits stay finite), and the whole fit
is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import serialize_model

L2_DEFAULT = 1e-3
MAX_NEWTON_ITER = 50
GRAD_TOL = 1e-9


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float

    def score(self, x: np.ndarray) -> float:
        return float(_sigmoid(np.atleast_1d(np.asarray(x, dtype=float) @ self.weights + self.bias))[0])

    def score_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return _sigmoid(X @ self.weights + self.bias)

    def to_payload(self) -> dict:
        return {"weights": self.weights.tolist(), "bias": self.bias}

    def dumps(self) -> bytes:
        return serialize_model("logistic", self.to_payload())

    @classmethod
    def from_payload(cls, payload: dict) -> "LogisticModel":
        return cls(weights=np.asarray(payload["weights"], dtype=float), bias=float(payload["bias"]))


def logistic_fit(X: np.ndarray, y01: np.ndarray, l2: float = L2_DEFAULT) -> LogisticModel:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y01, dtype=float)
    n, d = X.shape
    n_pos, n_neg = float(np.sum(y == 1)), float(np.sum(y == 0))
    sw = np.ones(n)
    if n_pos > 0 and n_neg > 0:
        sw = np.where(y == 1, n / (2 * n_pos), n / (2 * n_neg))
    Xb = np.hstack([X, np.ones((n, 1))])
    w = np.zeros(d + 1)
    for _ in range(MAX_NEWTON_ITER):
        p = _sigmoid(Xb @ w)
        grad = Xb.T @ (sw * (p - y)) + l2 * w
        if np.max(np.abs(grad)) < GRAD_TOL:
            break
        h = sw * p * (1.0 - p)
        hess = (Xb * h[:, None]).T @ Xb + l2 * np.eye(d + 1)
        w = w - np.linalg.solve(hess, grad)
    return LogisticModel(weights=w[:-1], bias=float(w[-1]))
