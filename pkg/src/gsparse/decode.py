"""l1-minimization decoders for noiseless and noisy linear measurements.

The noiseless decoder (basis pursuit) splits z = z+ - z- and solves the
resulting linear program exactly with a two-phase tableau simplex using
Bland's rule. The noisy decoder (basis pursuit denoising) runs a primal-dual
proximal splitting whose two proximal maps are soft-thresholding and
projection onto the measurement ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from gsparse.sensing import SensingMatrix

FEAS_TOL = 1e-8
_SIMPLEX_TOL = 1e-9
_BPDN_OBJ_TOL = 1e-10
_BPDN_WINDOW = 100
_BPDN_MAX_ITER = 200_000


class InfeasibleSystemError(ValueError):
    """y is not in the range of A (detected by LP phase 1)."""


class NumericalFailureError(RuntimeError):
    pass


@dataclass(frozen=True)
class DecodeResult:
    xhat: np.ndarray
    objective: float  # l1 norm of xhat
    feasibility_gap: float  # max(0, ||A xhat - y||_2 - eps)
    iterations: int
    converged: bool
    method: str  # "lp_exact" or "proximal"


def _as_matrix(A) -> np.ndarray:
    if isinstance(A, SensingMatrix):
        return A.entries
    return np.asarray(A, dtype=float)


def _simplex_pivot(tableau, basis, row, col):
    tableau[row] /= tableau[row, col]
    for i in range(tableau.shape[0]):
        if i != row and tableau[i, col] != 0.0:
            tableau[i] -= tableau[i, col] * tableau[row]
    basis[row] = col


def _simplex_iterate(tableau, basis, m, cost_row, allowed_cols, max_iter):
    # Bland's rule: smallest-index entering and leaving, which precludes cycling
    for it in range(max_iter):
        entering = -1
        for col in allowed_cols:
            if tableau[cost_row, col] < -_SIMPLEX_TOL:
                entering = col
                break
        if entering < 0:
            return it
        leaving = -1
        best_ratio = math.inf
        for i in range(m):
            coef = tableau[i, entering]
            if coef > _SIMPLEX_TOL:
                ratio = tableau[i, -1] / coef
                if ratio < best_ratio - _SIMPLEX_TOL or (
                    abs(ratio - best_ratio) <= _SIMPLEX_TOL
                    and (leaving < 0 or basis[i] < basis[leaving])
                ):
                    best_ratio = ratio
                    leaving = i
        if leaving < 0:
            raise NumericalFailureError("LP is unbounded")
        _simplex_pivot(tableau, basis, leaving, entering)
    raise NumericalFailureError("simplex iteration limit reached")


def _solve_lp(c, A, b, max_iter=20_000):
    """min c @ x s.t. A x = b, x >= 0 by two-phase tableau simplex."""
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    flip = b < 0.0
    A[flip] *= -1.0
    b[flip] *= -1.0

    # phase 1: artificial basis, minimize the sum of artificials
    tableau = np.zeros((m + 2, n + m + 1))
    tableau[:m, :n] = A
    tableau[:m, n:n + m] = np.eye(m)
    tableau[:m, -1] = b
    tableau[m, :n] = c  # phase-2 costs, kept in reduced form throughout
    tableau[m + 1, n:n + m] = 1.0
    tableau[m + 1] -= tableau[:m].sum(axis=0)  # reduce phase-1 costs over the basis
    basis = list(range(n, n + m))

    iters = _simplex_iterate(tableau, basis, m, m + 1, range(n), max_iter)
    if tableau[m + 1, -1] < -_SIMPLEX_TOL * (1.0 + float(np.sum(np.abs(b)))):
        raise InfeasibleSystemError(
            f"phase-1 objective {-tableau[m + 1, -1]:.3e} > 0: no solution to A x = y"
        )
    # drive any residual artificials out of the basis
    for i in range(m):
        if basis[i] >= n:
            for col in range(n):
                if abs(tableau[i, col]) > _SIMPLEX_TOL:
                    _simplex_pivot(tableau, basis, i, col)
                    break
    tableau[:, n:n + m] = 0.0  # retire artificial columns

    iters += _simplex_iterate(tableau[:m + 1], basis, m, m, range(n), max_iter)
    x = np.zeros(n)
    for i, col in enumerate(basis):
        if col < n:
            x[col] = tableau[i, -1]
    return x, iters


def decode_bp(A, y) -> DecodeResult:
    """Exact l1 minimizer subject to A z = y, via the split LP."""
    mat = _as_matrix(A)
    y = np.asarray(y, dtype=float)
    m, n = mat.shape
    if y.shape != (m,):
        raise ValueError(f"y has shape {y.shape}, expected ({m},)")
    if not np.any(y):
        xhat = np.zeros(n)
        return DecodeResult(xhat=xhat, objective=0.0, feasibility_gap=0.0,
                            iterations=0, converged=True, method="lp_exact")
    c = np.ones(2 * n)
    split, iters = _solve_lp(c, np.hstack([mat, -mat]), y)
    xhat = split[:n] - split[n:]
    gap = max(0.0, float(np.linalg.norm(mat @ xhat - y)))
    return DecodeResult(xhat=xhat, objective=float(np.sum(np.abs(xhat))),
                        feasibility_gap=gap, iterations=iters, converged=True,
                        method="lp_exact")


def _soft_threshold(z, threshold):
    return np.sign(z) * np.maximum(np.abs(z) - threshold, 0.0)


def _project_ball(v, center, radius):
    diff = v - center
    norm = float(np.linalg.norm(diff))
    if norm <= radius:
        return v
    return center + diff * (radius / norm)


def _operator_norm(mat, tol=1e-10, max_iter=10_000):
    rng = np.random.default_rng(0)
    v = rng.standard_normal(mat.shape[1])
    v /= np.linalg.norm(v)
    prev = 0.0
    for _ in range(max_iter):
        w = mat.T @ (mat @ v)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(norm - prev) <= tol * max(1.0, norm):
            break
        prev = norm
    return math.sqrt(norm)


def decode_bpdn(A, y, eps: float) -> DecodeResult:
    """min ||z||_1 s.t. ||A z - y||_2 <= eps by primal-dual proximal splitting."""
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    mat = _as_matrix(A)
    y = np.asarray(y, dtype=float)
    m, n = mat.shape
    if y.shape != (m,):
        raise ValueError(f"y has shape {y.shape}, expected ({m},)")
    if float(np.linalg.norm(y)) <= eps:
        return DecodeResult(xhat=np.zeros(n), objective=0.0, feasibility_gap=0.0,
                            iterations=0, converged=True, method="proximal")

    opnorm = _operator_norm(mat)
    if opnorm == 0.0:
        raise NumericalFailureError("zero measurement matrix with ||y|| > eps")
    step = 0.99 / opnorm
    x = np.zeros(n)
    xbar = x.copy()
    u = np.zeros(m)
    history = []
    for it in range(1, _BPDN_MAX_ITER + 1):
        v = u + step * (mat @ xbar)
        u = v - step * _project_ball(v / step, y, eps)
        x_new = _soft_threshold(x - step * (mat.T @ u), step)
        xbar = 2.0 * x_new - x
        x = x_new
        obj = float(np.sum(np.abs(x)))
        history.append(obj)
        if it % 10 == 0 and len(history) > _BPDN_WINDOW:
            if abs(history[-1] - history[-1 - _BPDN_WINDOW]) < _BPDN_OBJ_TOL:
                gap = max(0.0, float(np.linalg.norm(mat @ x - y)) - eps)
                if gap <= FEAS_TOL:
                    return DecodeResult(xhat=x, objective=obj, feasibility_gap=gap,
                                        iterations=it, converged=True, method="proximal")
    gap = max(0.0, float(np.linalg.norm(mat @ x - y)) - eps)
    return DecodeResult(xhat=x, objective=float(np.sum(np.abs(x))), feasibility_gap=gap,
                        iterations=_BPDN_MAX_ITER, converged=False, method="proximal")


def residual_norms(xhat, x_true, p_list) -> list:
    """lp norms of xhat - x_true for each p in [1, 2]."""
    xhat = np.asarray(xhat, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    if xhat.shape != x_true.shape:
        raise ValueError(f"shape mismatch: {xhat.shape} vs {x_true.shape}")
    h = xhat - x_true
    out = []
    for p in p_list:
        if not 1.0 <= p <= 2.0:
            raise ValueError(f"p must be in [1, 2], got {p}")
        out.append(float(np.sum(np.abs(h) ** p) ** (1.0 / p)))
    return out


class BasisPursuitDecoder(BaseEstimator, RegressorMixin):
    """sklearn-style front end for the l1 decoders.

    fit(X, y) treats X as the measurement matrix and decodes y; the solution
    is stored in ``coef_``. With eps=0 the exact LP path is used, otherwise
    the proximal path.

    Parameters
    ----------
    eps : float, default=0.0
        Measurement-noise radius; 0 means exact consistency.
    """

    def __init__(self, eps: float = 0.0):
        self.eps = eps

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float).ravel()
        if X.ndim != 2:
            raise ValueError(f"X must be 2-dimensional, got shape {X.shape}")
        if y.shape[0] != X.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
        if self.eps < 0.0:
            raise ValueError(f"eps must be nonnegative, got {self.eps}")
        if self.eps == 0.0:
            result = decode_bp(X, y)
        else:
            result = decode_bpdn(X, y, self.eps)
        self.coef_ = result.xhat
        self.objective_ = result.objective
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        self.result_ = result
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        return X @ self.coef_
