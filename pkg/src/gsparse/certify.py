"""Null-space-property certificates and residual error bounds.

A group restricted isometry constant below a closed-form threshold yields a
group robust null space property with explicit constants (rho, tau), which in
turn bounds the l1 and lp residual of the l1 decoder for p in [1, 2].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from gsparse.core import GroupStructure, _check_dim, enumerate_gks, group_sparsity_index
from gsparse.sensing import SensingMatrix

T_MIN = 4.0 / 3.0
_INT_TOL = 1e-9
_CHECK_SLACK = 1e-9


@dataclass(frozen=True)
class GrnspCertificate:
    t: float
    k: int
    delta: float
    mu: float
    a: float  # None when a^2 <= 0 (delta too large)
    b: float
    c: float
    rho: float  # None when undefined
    tau: float  # None when undefined
    valid: bool
    threshold: float
    reason: str = ""


@dataclass(frozen=True)
class ErrorBudget:
    sigma: float
    eps: float
    k: int
    p: float
    bound_l1: float
    bound_lp: float


@dataclass(frozen=True)
class Violation:
    trial: int
    support: tuple  # 1-based indices
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs


@dataclass(frozen=True)
class FalsificationReport:
    trials: int
    checks: int
    violations: int
    worst: Violation = None

    @property
    def passed(self) -> bool:
        return self.violations == 0


@dataclass(frozen=True)
class WitnessRecord:
    lambda0: tuple  # 1-based indices of the optimal group k-sparse support
    s1_groups: tuple
    s2_groups: tuple
    h0: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    r: int
    alpha: float
    s_budget: float
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def mu_of_t(t: float) -> float:
    """sqrt((t-1)t) - (t-1); lies in (0, 1/2] for t >= 4/3."""
    if t < T_MIN:
        raise ValueError(f"t must be >= 4/3, got {t}")
    return math.sqrt((t - 1.0) * t) - (t - 1.0)


def delta_threshold(t: float, G: GroupStructure) -> float:
    """Largest isometry constant for which the certificate construction works.

    With all-singleton groups this equals sqrt((t-1)/t), the known tight
    bound for conventional sparsity.
    """
    mu = mu_of_t(t)
    correction = mu**2 * G.m_max**2 / (2.0 * (t - 1.0) * G.m_min)
    return mu * (1.0 - mu) / (correction + 0.5 - mu + mu**2)


def _require_integer_tk(t: float, k: int) -> int:
    tk = t * k
    if abs(tk - round(tk)) > _INT_TOL:
        raise ValueError(f"t * k must be an integer, got {t} * {k} = {tk}")
    return int(round(tk))


def grnsp_constants(t: float, k: int, delta: float, G: GroupStructure) -> GrnspCertificate:
    """Derive the null-space-property constants from an isometry constant."""
    _require_integer_tk(t, k)
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    mu = mu_of_t(t)
    threshold = delta_threshold(t, G)
    a_sq = mu * (1.0 - mu) - delta * (0.5 - mu + mu**2)
    b = mu * (1.0 - mu) * math.sqrt(1.0 + delta)
    c = math.sqrt(delta * mu**2 * G.m_max**2 / (2.0 * (t - 1.0) * G.m_min))
    if a_sq <= 0.0:
        return GrnspCertificate(
            t=t, k=k, delta=delta, mu=mu, a=None, b=b, c=c,
            rho=None, tau=None, valid=False, threshold=threshold,
            reason="a-degenerate",
        )
    a = math.sqrt(a_sq)
    rho = c / a
    tau = b * math.sqrt(k) / a_sq
    valid = delta < threshold and rho < 1.0
    reason = "" if valid else "delta >= threshold"
    return GrnspCertificate(
        t=t, k=k, delta=delta, mu=mu, a=a, b=b, c=c,
        rho=rho, tau=tau, valid=valid, threshold=threshold, reason=reason,
    )


def _null_space_basis(A: np.ndarray) -> np.ndarray:
    _, svals, vt = np.linalg.svd(A, full_matrices=True)
    tol = max(A.shape) * np.finfo(float).eps * (svals[0] if svals.size else 1.0)
    rank = int(np.sum(svals > tol))
    return vt[rank:].T  # n x nullity


def grnsp_holds_sampled(
    A: SensingMatrix,
    k: int,
    G: GroupStructure,
    rho: float,
    tau: float,
    trials: int,
    seed: int = 0,
) -> FalsificationReport:
    """Sampled check of the null space property with constants (rho, tau).

    Draws half the test vectors from the ambient Gaussian and half projected
    onto the null space of A (where the property binds), and checks both the
    l2 inequality and its l1 consequence over every maximal group k-sparse
    support. A violation disproves the property; a clean pass is evidence.
    """
    if G.n != A.n:
        raise ValueError(f"group structure dimension {G.n} != matrix columns {A.n}")
    supports = [s for s in enumerate_gks(G, k) if s.indices]
    masks = np.zeros((len(supports), G.n), dtype=bool)
    for row, support in enumerate(supports):
        masks[row, np.asarray(support.indices, dtype=int) - 1] = True
    null_basis = _null_space_basis(A.entries)
    sqrt_k = math.sqrt(k)

    checks = 0
    violations = 0
    worst = None
    for trial in range(trials):
        rng = np.random.default_rng(int(seed) + trial)
        h = rng.standard_normal(G.n)
        if trial % 2 == 1 and null_basis.shape[1] > 0:
            h = null_basis @ (null_basis.T @ h)
            if not np.any(h):
                h = rng.standard_normal(G.n)
        abs_h = np.abs(h)
        sq_h = h**2
        ah_norm = float(np.linalg.norm(A.entries @ h))
        l2_on = np.sqrt(masks @ sq_h)
        l1_on = masks @ abs_h
        l1_off = float(np.sum(abs_h)) - l1_on
        rhs_l2 = (rho / sqrt_k) * l1_off + (tau / sqrt_k) * ah_norm
        rhs_l1 = rho * l1_off + tau * ah_norm
        for row in range(len(supports)):
            checks += 2
            for lhs, rhs in ((float(l2_on[row]), float(rhs_l2[row])),
                             (float(l1_on[row]), float(rhs_l1[row]))):
                if lhs > rhs + _CHECK_SLACK * (1.0 + abs(rhs)):
                    violations += 1
                    candidate = Violation(trial=trial, support=supports[row].indices,
                                          lhs=lhs, rhs=rhs)
                    if worst is None or candidate.margin > worst.margin:
                        worst = candidate
    return FalsificationReport(trials=trials, checks=checks, violations=violations, worst=worst)


def error_bounds(cert: GrnspCertificate, sigma: float, eps: float, p: float) -> ErrorBudget:
    """Residual bounds of the l1 decoder from a valid certificate."""
    if not cert.valid:
        raise ValueError(f"certificate is not valid ({cert.reason or 'invalid'})")
    if not 1.0 <= p <= 2.0:
        raise ValueError(f"p must be in [1, 2], got {p}")
    if sigma < 0.0 or eps < 0.0:
        raise ValueError("sigma and eps must be nonnegative")
    rho, tau, k = cert.rho, cert.tau, cert.k
    bound_l1 = 2.0 / (1.0 - rho) * ((1.0 + rho) * sigma + 2.0 * tau * eps)
    kp = k ** (1.0 - 1.0 / p)
    bound_lp = 2.0 / (1.0 - rho) * ((rho / kp + 1.0 + rho) * sigma + (1.0 / kp + 2.0) * tau * eps)
    return ErrorBudget(sigma=sigma, eps=eps, k=k, p=p, bound_l1=bound_l1, bound_lp=bound_lp)


def theorem1_witness(h, k: int, t: float, G: GroupStructure) -> WitnessRecord:
    """Replay the certificate proof's support split on a concrete vector.

    Splits the tail of h (outside the best group k-sparse support) into heavy
    and light groups, and verifies that the light part satisfies the capped
    mass hypotheses of the polytope decomposition with the proof's alpha and
    budget.
    """
    _require_integer_tk(t, k)
    h = _check_dim(h, G)
    index = group_sparsity_index(h, k, G, norm="l1")
    lambda0 = index.witness
    h0 = np.zeros_like(h)
    if lambda0:
        h0[np.asarray(lambda0, dtype=int) - 1] = h[np.asarray(lambda0, dtype=int) - 1]
    h_star = h - h0
    tail_l1 = float(np.sum(np.abs(h_star)))
    cutoff = G.m_max * tail_l1 / (k * (t - 1.0))

    s1, s2 = [], []
    for j in range(1, G.g + 1):
        mass = float(np.sum(np.abs(h_star[G.indices0(j)])))
        (s1 if mass > cutoff else s2).append(j)
    h1 = np.zeros_like(h)
    h2 = np.zeros_like(h)
    for j in s1:
        idx = G.indices0(j)
        h1[idx] = h_star[idx]
    for j in s2:
        idx = G.indices0(j)
        h2[idx] = h_star[idx]

    r = len(s1)
    s_budget = k * (t - 1.0) / G.m_max - r
    slack = _CHECK_SLACK * (1.0 + tail_l1)
    per_group_ok = all(
        float(np.sum(np.abs(h2[G.indices0(j)]))) <= cutoff + slack for j in range(1, G.g + 1)
    )
    checks = {
        "tail_splits": bool(np.max(np.abs(h_star - h1 - h2), initial=0.0) <= 1e-12),
        "r_bounded": r <= k * (t - 1.0) / G.m_max + _CHECK_SLACK,
        "h2_l1_bounded": float(np.sum(np.abs(h2))) <= s_budget * cutoff + slack,
        "h2_per_group_capped": per_group_ok,
    }
    return WitnessRecord(
        lambda0=lambda0, s1_groups=tuple(s1), s2_groups=tuple(s2),
        h0=h0, h1=h1, h2=h2, r=r, alpha=cutoff, s_budget=s_budget, checks=checks,
    )
