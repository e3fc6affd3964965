"""Binary RBF-kernel SVM trained by sequential minimal optimization.

The solver is the simplified SMO variant: sweep the training set for KKT
violators, pair each violator with the partner maximizing |E_i - E_j| over
the non-bound set (random partner when that set is empty), and solve the
two-variable subproblem exactly.  Each accepted pair step maximizes the dual
along its direction, so the dual objective never decreases.  Convergence
means a sweep found no violator beyond ``tol``; hitting ``max_passes``
sweeps first returns the best-so-far solution flagged unconverged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .base import serialize_model

EPS = 1e-12


@dataclass(frozen=True)
class SvmParams:
    C: float = 1.0
    gamma: float | None = None  # None: 1 / (n_dims * mean feature variance)
    tol: float = 1e-3
    max_passes: int = 100


@dataclass
class SvmModel:
    support_x: np.ndarray   # (m, d)
    dual_coef: np.ndarray   # (m,) alpha_i * y_i
    bias: float
    gamma: float
    C: float
    converged: bool
    n_updates: int = 0
    # full training-set view kept for KKT inspection; excluded from the blob
    alpha: np.ndarray | None = field(default=None, repr=False)

    def decision(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        K = rbf_kernel(X, self.support_x, self.gamma)
        return K @ self.dual_coef + self.bias

    def decision_one(self, x: np.ndarray) -> float:
        return float(self.decision(np.asarray(x, dtype=float)[None, :])[0])

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.where(self.decision(X) >= 0.0, 1, -1)

    def to_payload(self) -> dict:
        return {
            "support_x": self.support_x.tolist(),
            "dual_coef": self.dual_coef.tolist(),
            "bias": self.bias,
            "gamma": self.gamma,
            "C": self.C,
            "converged": self.converged,
        }

    def dumps(self) -> bytes:
        return serialize_model("svm", self.to_payload())

    @classmethod
    def from_payload(cls, payload: dict) -> "SvmModel":
        return cls(
            support_x=np.asarray(payload["support_x"], dtype=float),
            dual_coef=np.asarray(payload["dual_coef"], dtype=float),
            bias=float(payload["bias"]),
            gamma=float(payload["gamma"]),
            C=float(payload["C"]),
            converged=bool(payload["converged"]),
        )


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    sq = (
        np.sum(A**2, axis=1)[:, None]
        + np.sum(B**2, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    return np.exp(-gamma * np.maximum(sq, 0.0))


def default_gamma(X: np.ndarray) -> float:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    spread = float(np.mean(X.var(axis=0)))
    if spread <= 0.0:
        return 1.0
    return 1.0 / (X.shape[1] * spread)


def dual_objective(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    """W(alpha) = sum(alpha) - 0.5 * (alpha y)' K (alpha y)."""
    ay = alpha * y
    return float(np.sum(alpha) - 0.5 * ay @ K @ ay)


def kkt_max_violation(alpha: np.ndarray, y: np.ndarray, decision: np.ndarray,
                      C: float) -> float:
    """Largest KKT residual over the training set.

    alpha=0 wants y*f >= 1, interior alpha wants y*f == 1, alpha=C wants
    y*f <= 1; the residual is how far each point falls on the wrong side.
    """
    yf = y * decision
    lower = np.where(alpha < C - EPS, np.maximum(0.0, 1.0 - yf), 0.0)
    upper = np.where(alpha > EPS, np.maximum(0.0, yf - 1.0), 0.0)
    return float(np.max(np.maximum(lower, upper)))


def _pair_step(i, j, alpha, y, K, F, b, C):
    """Exact two-variable subproblem; returns updated (b, changed)."""
    if i == j:
        return b, False
    a_i, a_j = alpha[i], alpha[j]
    y_i, y_j = y[i], y[j]
    E_i, E_j = F[i] - y_i, F[j] - y_j
    s = y_i * y_j
    if s < 0:
        L, H = max(0.0, a_j - a_i), min(C, C + a_j - a_i)
    else:
        L, H = max(0.0, a_i + a_j - C), min(C, a_i + a_j)
    if H - L < EPS:
        return b, False
    k_ii, k_jj, k_ij = K[i, i], K[j, j], K[i, j]
    eta = k_ii + k_jj - 2.0 * k_ij
    if eta > EPS:
        a_j_new = np.clip(a_j + y_j * (E_i - E_j) / eta, L, H)
    else:
        # flat/concave direction: the dual is linear along it, move to the
        # better endpoint (Platt's objective-at-bounds evaluation)
        f_i = y_i * (E_i + b) - a_i * k_ii - s * a_j * k_ij
        f_j = y_j * (E_j + b) - s * a_i * k_ij - a_j * k_jj
        L_i = a_i + s * (a_j - L)
        H_i = a_i + s * (a_j - H)
        obj_L = L_i * f_i + L * f_j + 0.5 * L_i**2 * k_ii + 0.5 * L**2 * k_jj + s * L * L_i * k_ij
        obj_H = H_i * f_i + H * f_j + 0.5 * H_i**2 * k_ii + 0.5 * H**2 * k_jj + s * H * H_i * k_ij
        if obj_L < obj_H - EPS:
            a_j_new = L
        elif obj_L > obj_H + EPS:
            a_j_new = H
        else:
            return b, False
    if abs(a_j_new - a_j) < EPS * (a_j_new + a_j + EPS):
        return b, False
    a_i_new = a_i + s * (a_j - a_j_new)

    b1 = b - E_i - y_i * (a_i_new - a_i) * k_ii - y_j * (a_j_new - a_j) * k_ij
    b2 = b - E_j - y_i * (a_i_new - a_i) * k_ij - y_j * (a_j_new - a_j) * k_jj
    if EPS < a_i_new < C - EPS:
        b_new = b1
    elif EPS < a_j_new < C - EPS:
        b_new = b2
    else:
        b_new = 0.5 * (b1 + b2)

    F += (a_i_new - a_i) * y_i * K[i] + (a_j_new - a_j) * y_j * K[j] + (b_new - b)
    alpha[i], alpha[j] = a_i_new, a_j_new
    return b_new, True


def smo_solve(K: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-3,
              max_passes: int = 100, seed: int = 0):
    """Run SMO on a precomputed kernel matrix.

    Returns (alpha, bias, converged, n_updates).
    """
    n = len(y)
    rng = np.random.default_rng(seed)
    alpha = np.zeros(n)
    b = 0.0
    F = np.zeros(n) + b  # decision values, kept incrementally in-sweep
    n_updates = 0
    converged = False
    for _ in range(max_passes):
        ay = alpha * y
        F = K @ ay + b  # refresh to kill incremental drift
        yf = y * F
        violators = np.flatnonzero(
            ((alpha < C - EPS) & (yf < 1.0 - tol)) | ((alpha > EPS) & (yf > 1.0 + tol))
        )
        if len(violators) == 0:
            converged = True
            break
        changed = 0
        for i in violators:
            yf_i = y[i] * F[i]
            still = (alpha[i] < C - EPS and yf_i < 1.0 - tol) or (
                alpha[i] > EPS and yf_i > 1.0 + tol
            )
            if not still:
                continue
            E = F - y
            non_bound = np.flatnonzero((alpha > EPS) & (alpha < C - EPS))
            candidates = non_bound[non_bound != i]
            if len(candidates):
                j = int(candidates[np.argmax(np.abs(E[i] - E[candidates]))])
            else:
                j = int(rng.integers(n - 1))
                j += j >= i
            b, did = _pair_step(i, j, alpha, y, K, F, b, C)
            if not did and len(candidates):
                # heuristic partner made no progress; try a random one
                j = int(rng.integers(n - 1))
                j += j >= i
                b, did = _pair_step(i, j, alpha, y, K, F, b, C)
            if did:
                changed += 1
                n_updates += 1
        if changed == 0:
            break  # violators remain but no pair can move: stop, unconverged
    return alpha, b, converged, n_updates


def svm_fit(X: np.ndarray, y: np.ndarray, params: SvmParams = SvmParams()) -> SvmModel:
    """Fit a binary +-1 SVM with the Gaussian kernel via SMO."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if set(np.unique(y)) != {-1.0, 1.0}:
        raise ValueError("labels must contain both +1 and -1")
    if params.C <= 0:
        raise ValueError("C must be positive")
    gamma = params.gamma if params.gamma is not None else default_gamma(X)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    K = rbf_kernel(X, X, gamma)
    alpha, b, converged, n_updates = smo_solve(
        K, y, params.C, tol=params.tol, max_passes=params.max_passes
    )
    support = alpha > EPS
    return SvmModel(
        support_x=X[support].copy(),
        dual_coef=(alpha * y)[support],
        bias=float(b),
        gamma=float(gamma),
        C=float(params.C),
        converged=converged,
        n_updates=n_updates,
        alpha=alpha,
    )


def svm_decision(model: SvmModel, x: np.ndarray) -> float:
    return model.decision_one(x)
