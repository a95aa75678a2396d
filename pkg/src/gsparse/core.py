"""Group structures, norms, and sparsity indices.

Index conventions: group members are 1-based in the public API (and in the
JSON interchange format); group ids run from 1 to g. Helpers convert to
0-based numpy indexing internally.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

DEFAULT_MAX_ENUM_GROUPS = 24


class GroupStructureError(ValueError):
    """A proposed group structure is not a partition of {1..n}."""


class GroupOverlapError(GroupStructureError):
    pass


class GroupCoverageError(GroupStructureError):
    pass


class EmptyGroupError(GroupStructureError):
    pass


class EnumerationLimitError(ValueError):
    """Exhaustive support enumeration would be too large."""


@dataclass(frozen=True)
class GroupStructure:
    """A partition of {1..n} into g disjoint nonempty groups."""

    n: int
    groups: tuple  # tuple of tuples of sorted 1-based indices
    m_max: int
    m_min: int

    @property
    def g(self) -> int:
        return len(self.groups)

    def indices0(self, j: int) -> np.ndarray:
        """0-based member indices of group j (1-based id)."""
        if not 1 <= j <= self.g:
            raise ValueError(f"bad group id {j}: must be in 1..{self.g}")
        return np.asarray(self.groups[j - 1], dtype=int) - 1

    def group_sizes(self) -> tuple:
        return tuple(len(gr) for gr in self.groups)


@dataclass(frozen=True)
class GroupKSparseSet:
    """A union of whole groups with total cardinality <= k."""

    member_groups: tuple  # sorted 1-based group ids
    indices: tuple  # sorted 1-based member indices
    budget: int


@dataclass(frozen=True)
class SparsityIndexResult:
    """Optimal value and witness support of a (group) sparsity index."""

    value: float
    witness: tuple  # sorted 1-based indices of the kept support
    witness_groups: tuple = ()  # group ids, populated by group_sparsity_index


def make_group_structure(n, groups) -> GroupStructure:
    """Validate a partition of {1..n} and compute m_max / m_min."""
    if n < 1:
        raise ValueError(f"ambient dimension must be positive, got {n}")
    normalized = []
    seen = set()
    for gi, group in enumerate(groups, start=1):
        members = sorted(int(i) for i in group)
        if not members:
            raise EmptyGroupError(f"group {gi} is empty")
        for i in members:
            if not 1 <= i <= n:
                raise GroupStructureError(f"index {i} outside 1..{n}")
            if i in seen:
                raise GroupOverlapError(f"index {i} appears in more than one group")
            seen.add(i)
        normalized.append(tuple(members))
    if len(seen) != n:
        missing = sorted(set(range(1, n + 1)) - seen)
        raise GroupCoverageError(f"indices not covered by any group: {missing}")
    sizes = [len(gr) for gr in normalized]
    return GroupStructure(n=n, groups=tuple(normalized), m_max=max(sizes), m_min=min(sizes))


def singleton_groups(n) -> GroupStructure:
    """All-singleton partition; reduces every group notion to the plain one."""
    return make_group_structure(n, [[i] for i in range(1, n + 1)])


def _check_dim(x, G: GroupStructure) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (G.n,):
        raise ValueError(f"vector has shape {x.shape}, expected ({G.n},)")
    return x


def group_project(x, G: GroupStructure, j: int) -> np.ndarray:
    """The vector equal to x on group j and zero elsewhere."""
    x = _check_dim(x, G)
    out = np.zeros_like(x)
    idx = G.indices0(j)
    out[idx] = x[idx]
    return out


def lp_norm(x, p) -> float:
    """Standard lp norm; p = inf gives the max magnitude."""
    x = np.asarray(x, dtype=float)
    if p != math.inf and p < 1:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    if x.size == 0:
        return 0.0
    if p == math.inf:
        return float(np.max(np.abs(x)))
    if p == 1:
        return float(np.sum(np.abs(x)))
    if p == 2:
        return float(np.linalg.norm(x))
    return float(np.sum(np.abs(x) ** p) ** (1.0 / p))


def gl_norm(x, G: GroupStructure) -> float:
    """Sum of per-group euclidean norms (no group-size normalization)."""
    x = _check_dim(x, G)
    return float(sum(np.linalg.norm(x[G.indices0(j)]) for j in range(1, G.g + 1)))


def sgl_norm(x, G: GroupStructure, w) -> float:
    """Convex mix of per-group l1 and l2 norms: w=0 is plain l1, w=1 is gl_norm."""
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"mixing weight must be in [0, 1], got {w}")
    x = _check_dim(x, G)
    total = 0.0
    for j in range(1, G.g + 1):
        xg = x[G.indices0(j)]
        total += (1.0 - w) * np.sum(np.abs(xg)) + w * np.linalg.norm(xg)
    return float(total)


def sparsity_index(x, k: int, p) -> SparsityIndexResult:
    """lp distance from x to the nearest k-sparse vector.

    The witness is the set of the k largest-magnitude entries, ties broken
    toward lower indices.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")
    order = sorted(range(n), key=lambda i: (-abs(x[i]), i))
    kept = sorted(order[:k])
    residual = x.copy()
    residual[kept] = 0.0
    return SparsityIndexResult(value=lp_norm(residual, p), witness=tuple(i + 1 for i in kept))


def _group_masses(x, G: GroupStructure, norm: str) -> list:
    if norm == "l1":
        return [float(np.sum(np.abs(x[G.indices0(j)]))) for j in range(1, G.g + 1)]
    if norm == "l2":
        return [float(np.sum(x[G.indices0(j)] ** 2)) for j in range(1, G.g + 1)]
    raise ValueError(f"norm must be 'l1' or 'l2', got {norm!r}")


def group_sparsity_index(x, k: int, G: GroupStructure, norm: str = "l1") -> SparsityIndexResult:
    """Distance from x to the nearest group k-sparse vector.

    Solved exactly as a 0/1 knapsack over groups: maximize the kept mass
    (l1 mass, or squared l2 mass) subject to the total cardinality budget k.
    Value ties are broken toward the lexicographically smallest group subset.
    The empty selection is always feasible, so when no group fits the index
    equals the full norm of x.
    """
    x = _check_dim(x, G)
    if not 1 <= k <= G.n:
        raise ValueError(f"k must be in 1..{G.n}, got {k}")
    values = _group_masses(x, G, norm)
    sizes = G.group_sizes()
    g = G.g

    @lru_cache(maxsize=None)
    def solve(j, cap):
        # best (kept_mass, group subset 0-based) over groups j..g-1
        if j == g:
            return (0.0, ())
        best = solve(j + 1, cap)
        if sizes[j] <= cap:
            sub_value, sub_set = solve(j + 1, cap - sizes[j])
            inc = (values[j] + sub_value, (j,) + sub_set)
            if inc[0] > best[0] or (inc[0] == best[0] and inc[1] < best[1]):
                best = inc
        return best

    kept_mass, subset = solve(0, k)
    solve.cache_clear()
    member_groups = tuple(j + 1 for j in subset)
    indices = tuple(sorted(i for j in member_groups for i in G.groups[j - 1]))
    if norm == "l1":
        value = max(0.0, float(np.sum(np.abs(x))) - kept_mass)
    else:
        value = math.sqrt(max(0.0, float(np.sum(x**2)) - kept_mass))
    return SparsityIndexResult(value=value, witness=indices, witness_groups=member_groups)


def _max_enum_groups() -> int:
    return int(os.environ.get("GSPARSE_MAX_ENUM", DEFAULT_MAX_ENUM_GROUPS))


def enumerate_gks(G: GroupStructure, k: int) -> list:
    """All inclusion-maximal group k-sparse supports, lexicographic in S.

    Maximal supports suffice for isometry and null-space-property checks,
    which are monotone under support inclusion.
    """
    if G.g > _max_enum_groups():
        raise EnumerationLimitError(
            f"{G.g} groups exceeds the enumeration guard "
            f"({_max_enum_groups()}; override with GSPARSE_MAX_ENUM)"
        )
    sizes = G.group_sizes()
    results = []

    def dfs(start, chosen, weight):
        extended = False
        for j in range(start, G.g):
            if weight + sizes[j] <= k:
                extended = True
                dfs(j + 1, chosen + (j,), weight + sizes[j])
        if not extended:
            chosen_set = set(chosen)
            if all(j in chosen_set or weight + sizes[j] > k for j in range(G.g)):
                results.append(chosen)

    dfs(0, (), 0)
    seen = set()
    out = []
    for chosen in results:
        member_groups = tuple(j + 1 for j in chosen)
        indices = tuple(sorted(i for j in member_groups for i in G.groups[j - 1]))
        if indices in seen:
            continue
        seen.add(indices)
        out.append(GroupKSparseSet(member_groups=member_groups, indices=indices, budget=k))
    return out


def enumerate_gks_all(G: GroupStructure, k: int) -> list:
    """Every group k-sparse support, maximal or not (test oracle)."""
    sizes = G.group_sizes()
    out = []
    for r in range(G.g + 1):
        for combo in combinations(range(G.g), r):
            if sum(sizes[j] for j in combo) <= k:
                member_groups = tuple(j + 1 for j in combo)
                indices = tuple(sorted(i for j in member_groups for i in G.groups[j - 1]))
                out.append(GroupKSparseSet(member_groups=member_groups, indices=indices, budget=k))
    return out


def is_group_k_sparse(x, k: int, G: GroupStructure) -> bool:
    """True iff supp(x) lies inside some group k-sparse set."""
    x = _check_dim(x, G)
    touched = [j for j in range(1, G.g + 1) if np.any(x[G.indices0(j)] != 0.0)]
    return sum(len(G.groups[j - 1]) for j in touched) <= k
