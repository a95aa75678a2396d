"""Convex polytope decomposition of vectors with capped group l1 masses.

A vector whose per-group l1 masses are all <= alpha and whose total l1 mass
is <= s * alpha can be written as a convex combination of atoms that share
its support, carry its exact l1 norm, and are each group (s * m_max)-sparse.
The recursion peels one group off the support at every level, so it
terminates in at most |group support| - s steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gsparse.core import GroupStructure, _check_dim

RECONSTRUCTION_TOL = 1e-10
HYPOTHESIS_SLACK = 1e-12
_MERGE_TOL = 1e-12


class HypothesisViolatedError(ValueError):
    """The capped-mass hypotheses do not hold for the given (v, alpha, s)."""


class RecursionGuardError(RuntimeError):
    """The recursion failed to shrink the group support (implementation bug)."""


@dataclass(frozen=True)
class ConvexDecomposition:
    weights: tuple  # positive reals summing to 1
    atoms: tuple  # tuple of vectors (numpy arrays)
    source: np.ndarray  # the decomposed vector
    alpha: float  # per-group l1 cap
    s: int  # integer mass budget


@dataclass(frozen=True)
class DecompositionCheck:
    support_contained: bool
    l1_preserved: bool
    group_sparse: bool
    reconstructs: bool
    weights_simplex: bool
    l2_bound: bool  # per-atom squared l2 <= (s * m_max / m_min) * alpha^2

    @property
    def passed(self) -> bool:
        return (
            self.support_contained
            and self.l1_preserved
            and self.group_sparse
            and self.reconstructs
            and self.weights_simplex
            and self.l2_bound
        )


def group_support(v, G: GroupStructure) -> frozenset:
    """The set of group ids on which v is nonzero (exact zero test)."""
    v = _check_dim(v, G)
    return frozenset(j for j in range(1, G.g + 1) if np.any(v[G.indices0(j)] != 0.0))


def _decompose_recursive(v, alpha, s, G, depth, max_depth):
    if depth > max_depth:
        raise RecursionGuardError("recursion depth exceeded the group-support budget")
    support = sorted(group_support(v, G))
    r = len(support)
    if r <= s:
        return [(1.0, v.copy())]

    # group components sorted by descending l1 mass, ties by group id
    parts = [(float(np.sum(np.abs(v[G.indices0(j)]))), j) for j in support]
    parts.sort(key=lambda item: (-item[0], item[1]))
    a = [mass for mass, _ in parts]
    p_hat = []
    for mass, j in parts:
        comp = np.zeros_like(v)
        idx = G.indices0(j)
        comp[idx] = v[idx] / mass
        p_hat.append(comp)

    # largest pivot beta (1-based position in 1..r-1) with the tail mass cap
    tails = np.cumsum(a[::-1])[::-1]  # tails[i] = sum(a[i:])
    beta = None
    for candidate in range(r - 1, 0, -1):
        if tails[candidate - 1] <= (r - candidate) * alpha + HYPOTHESIS_SLACK:
            beta = candidate
            break
    if beta is None:
        raise RecursionGuardError("no pivot found; hypotheses should guarantee one")

    tail_mean = tails[beta - 1] / (r - beta)
    b = [tail_mean - a[t - 1] for t in range(beta, r + 1)]
    b_total = sum(b)
    if b_total <= 0.0:
        raise RecursionGuardError("degenerate pivot block with zero total weight")

    head = np.zeros_like(v)
    for i in range(beta - 1):
        head += a[i] * p_hat[i]

    out = []
    tail_sum = np.zeros_like(v)
    for i in range(beta - 1, r):
        tail_sum += p_hat[i]
    for offset, bt in enumerate(b):
        if bt <= 0.0:
            continue  # equal masses at the pivot boundary give a zero weight
        t = beta + offset
        w_t = head + b_total * (tail_sum - p_hat[t - 1])
        lam_t = bt / b_total
        for sub_weight, atom in _decompose_recursive(w_t, alpha, s, G, depth + 1, max_depth):
            out.append((lam_t * sub_weight, atom))
    return out


def _merge_atoms(pairs):
    merged = []
    for weight, atom in pairs:
        for i, (w0, a0) in enumerate(merged):
            if np.allclose(atom, a0, rtol=0.0, atol=_MERGE_TOL):
                merged[i] = (w0 + weight, a0)
                break
        else:
            merged.append((weight, atom))
    return merged


def polytope_decompose(v, alpha: float, s: int, G: GroupStructure) -> ConvexDecomposition:
    """Decompose v into a convex combination of group (s*m_max)-sparse atoms.

    Requires every per-group l1 mass <= alpha and the total l1 mass <= s*alpha
    (checked with a 1e-12 slack). The pivot is the largest admissible one and
    group components are sorted by descending mass with group-id tie-break, so
    the output is deterministic.
    """
    v = _check_dim(v, G)
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if s < 1 or int(s) != s:
        raise ValueError(f"s must be a positive integer, got {s}")
    s = int(s)
    for j in range(1, G.g + 1):
        mass = float(np.sum(np.abs(v[G.indices0(j)])))
        if mass > alpha + HYPOTHESIS_SLACK:
            raise HypothesisViolatedError(
                f"group {j} has l1 mass {mass:.17g} > alpha = {alpha:.17g} "
                f"(excess {mass - alpha:.3e})"
            )
    total = float(np.sum(np.abs(v)))
    if total > s * alpha + HYPOTHESIS_SLACK:
        raise HypothesisViolatedError(
            f"total l1 mass {total:.17g} > s * alpha = {s * alpha:.17g} "
            f"(excess {total - s * alpha:.3e})"
        )

    max_depth = max(1, len(group_support(v, G)) - s + 1)
    pairs = _merge_atoms(_decompose_recursive(v, alpha, s, G, 0, max_depth))
    weights = tuple(w for w, _ in pairs)
    atoms = tuple(atom for _, atom in pairs)
    return ConvexDecomposition(weights=weights, atoms=atoms, source=v.copy(), alpha=float(alpha), s=s)


def check_decomposition(dec: ConvexDecomposition, G: GroupStructure) -> DecompositionCheck:
    """Verify every structural property of a decomposition, within 1e-10."""
    v = dec.source
    tol = RECONSTRUCTION_TOL
    v_l1 = float(np.sum(np.abs(v)))
    supp_v = set(np.nonzero(v)[0])
    budget = dec.s * G.m_max
    bound = (dec.s * G.m_max / G.m_min) * dec.alpha**2

    support_contained = True
    l1_preserved = True
    group_sparse = True
    l2_bound = True
    recon = np.zeros_like(v)
    for weight, atom in zip(dec.weights, dec.atoms):
        recon += weight * atom
        if not set(np.nonzero(atom)[0]) <= supp_v:
            support_contained = False
        if abs(float(np.sum(np.abs(atom))) - v_l1) > tol:
            l1_preserved = False
        touched = group_support(atom, G)
        if sum(len(G.groups[j - 1]) for j in touched) > budget:
            group_sparse = False
        if float(np.sum(atom**2)) > bound + tol:
            l2_bound = False
    reconstructs = bool(np.max(np.abs(recon - v), initial=0.0) <= tol)
    weights_simplex = bool(
        all(w > 0.0 for w in dec.weights) and abs(sum(dec.weights) - 1.0) <= 1e-12
    )
    return DecompositionCheck(
        support_contained=support_contained,
        l1_preserved=l1_preserved,
        group_sparse=group_sparse,
        reconstructs=reconstructs,
        weights_simplex=weights_simplex,
        l2_bound=l2_bound,
    )
