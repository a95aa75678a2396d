"""Measurement-matrix generation and restricted isometry constants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from gsparse.core import (
    EnumerationLimitError,
    GroupStructure,
    enumerate_gks,
    singleton_groups,
)

_MASK64 = (1 << 64) - 1
_RIP_ENUM_LIMIT = 10**6


@dataclass(frozen=True)
class SensingMatrix:
    """Dense real measurement matrix with generation metadata."""

    m: int
    n: int
    entries: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.shape != (self.m, self.n):
            raise ValueError(f"entries shape {entries.shape} != ({self.m}, {self.n})")
        if not np.all(np.isfinite(entries)):
            raise ValueError("matrix entries must be finite")
        object.__setattr__(self, "entries", entries)


@dataclass(frozen=True)
class IsometryReport:
    """Smallest isometry constant found over the tested supports.

    When exact is False the value is a certified lower bound on the true
    constant (only a subset of supports was tested).
    """

    order: int
    delta: float
    kind: str  # "rip" or "grip"
    exact: bool
    extremal_support: tuple  # sorted 1-based indices
    eigen_range: tuple  # (min, max) Gram eigenvalue over tested supports


def _splitmix64_stream(seed: int, count: int) -> np.ndarray:
    """`count` pseudorandom uint64 words from the splitmix64 sequence."""
    state = seed & _MASK64
    out = np.empty(count, dtype=np.uint64)
    for i in range(count):
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        z = z ^ (z >> 31)
        out[i] = z
    return out


def _box_muller(uniforms: np.ndarray) -> np.ndarray:
    """Standard normals from pairs of uniforms in (0, 1]."""
    u1 = uniforms[0::2]
    u2 = uniforms[1::2]
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * math.pi * u2
    return np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1).ravel()


def gaussian_matrix(m: int, n: int, seed: int) -> SensingMatrix:
    """i.i.d. N(0, 1/m) matrix, filled row-major, deterministic per seed.

    Variance 1/m makes columns have unit expected squared norm. Uniform bits
    come from splitmix64; normals from the Box-Muller transform.
    """
    if m < 1 or n < 1:
        raise ValueError(f"dimensions must be positive, got m={m}, n={n}")
    count = m * n
    pairs = (count + 1) // 2
    words = _splitmix64_stream(int(seed), 2 * pairs)
    # 53-bit mantissa uniforms shifted into (0, 1] so log() is safe
    uniforms = ((words >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
    normals = _box_muller(uniforms)[:count]
    entries = (normals / math.sqrt(m)).reshape(m, n)
    provenance = {"generator": "gaussian", "seed": int(seed), "normalization": "variance 1/m"}
    return SensingMatrix(m=m, n=n, entries=entries, provenance=provenance)


def _support_eigen_range(A: np.ndarray, indices0: np.ndarray) -> tuple:
    gram = A[:, indices0].T @ A[:, indices0]
    eigs = np.linalg.eigvalsh(gram)
    return float(eigs[0]), float(eigs[-1])


def _report_from_supports(A: SensingMatrix, k: int, supports, kind: str, exact: bool) -> IsometryReport:
    mat = A.entries
    best_delta = -1.0
    extremal = ()
    lo, hi = math.inf, -math.inf
    tested = 0
    for support in supports:
        if not support.indices:
            continue
        idx0 = np.asarray(support.indices, dtype=int) - 1
        emin, emax = _support_eigen_range(mat, idx0)
        lo, hi = min(lo, emin), max(hi, emax)
        delta = max(1.0 - emin, emax - 1.0)
        if delta > best_delta:
            best_delta = delta
            extremal = support.indices
        tested += 1
    if tested == 0:
        raise ValueError("no nonempty group k-sparse support to test")
    return IsometryReport(
        order=k,
        delta=max(0.0, best_delta),
        kind=kind,
        exact=exact,
        extremal_support=extremal,
        eigen_range=(lo, hi),
    )


def grip_constant(A: SensingMatrix, k: int, G: GroupStructure) -> IsometryReport:
    """Exact group restricted isometry constant of order k.

    Enumerates the inclusion-maximal group k-sparse supports (eigenvalue
    interlacing makes the constant monotone under support inclusion) and takes
    the worst Gram-eigenvalue deviation from 1.
    """
    if G.n != A.n:
        raise ValueError(f"group structure dimension {G.n} != matrix columns {A.n}")
    if k > A.n:
        raise ValueError(f"order {k} exceeds column count {A.n}")
    supports = enumerate_gks(G, k)
    return _report_from_supports(A, k, supports, kind="grip", exact=True)


def rip_constant(A: SensingMatrix, k: int) -> IsometryReport:
    """Exact restricted isometry constant: GRIP with all-singleton groups."""
    if math.comb(A.n, k) > _RIP_ENUM_LIMIT:
        raise EnumerationLimitError(
            f"C({A.n}, {k}) supports exceed the enumeration limit {_RIP_ENUM_LIMIT}"
        )
    report = grip_constant(A, k, singleton_groups(A.n))
    return IsometryReport(
        order=report.order,
        delta=report.delta,
        kind="rip",
        exact=True,
        extremal_support=report.extremal_support,
        eigen_range=report.eigen_range,
    )


def grip_lower_bound(
    A: SensingMatrix, k: int, G: GroupStructure, trials: int, seed: int = 0
) -> IsometryReport:
    """Monte-Carlo lower bound on the GRIP constant.

    Each trial greedily packs groups in a random order into a maximal group
    k-sparse support; the reported delta never exceeds the exact constant.
    """
    if G.n != A.n:
        raise ValueError(f"group structure dimension {G.n} != matrix columns {A.n}")
    sizes = G.group_sizes()

    class _Support:
        def __init__(self, indices):
            self.indices = indices

    supports = []
    for t in range(trials):
        rng = np.random.default_rng(int(seed) + t)
        order = rng.permutation(G.g)
        chosen, weight = [], 0
        for j in order:
            if weight + sizes[j] <= k:
                chosen.append(j)
                weight += sizes[j]
        indices = tuple(sorted(i for j in chosen for i in G.groups[j]))
        supports.append(_Support(indices))
    report = _report_from_supports(A, k, supports, kind="grip", exact=False)
    return report
