"""End-to-end acceptance suite.

Each test prints one PASS/FAIL line for its criterion. Run with
``pytest tests/test_acceptance.py -s`` to see the per-criterion report.
"""

import math

import numpy as np
import pytest
from scipy.optimize import linprog

from gsparse import certify, core, decode, decomposition, sensing

from test_core import oracle_group_index, random_structure
from test_decomposition import random_valid_input
from test_sensing import brute_force_rip


def report(name, passed, detail=""):
    tag = "PASS" if passed else "FAIL"
    print(f"[{tag}] {name}" + (f" ({detail})" if detail else ""))
    assert passed, f"{name}: {detail}"


def pair_structure(n):
    return core.make_group_structure(n, [[2 * i + 1, 2 * i + 2] for i in range(n // 2)])


def certified_instances(count=20, m=96, n=12, t=2.0, k=2):
    """Random tall Gaussian instances; returns (certified list, excluded count)."""
    G = pair_structure(n)
    threshold = certify.delta_threshold(t, G)
    tk = int(round(t * k))
    kept, excluded = [], 0
    for seed in range(count):
        A = sensing.gaussian_matrix(m, n, seed)
        delta = sensing.grip_constant(A, tk, G).delta
        if 0.0 < delta < threshold:
            kept.append((A, certify.grnsp_constants(t, k, delta, G), G))
        else:
            excluded += 1
    return kept, excluded


@pytest.fixture(scope="module")
def certified():
    kept, excluded = certified_instances()
    assert kept, "no instance certified; cannot exercise criteria 4-6"
    return kept, excluded


def test_criterion_1_threshold_specialization():
    worst = 0.0
    for t in (4.0 / 3.0, 1.5, 2.0, 3.0, 5.0):
        value = certify.delta_threshold(t, core.singleton_groups(8))
        worst = max(worst, abs(value - math.sqrt((t - 1.0) / t)))
    at_two = certify.delta_threshold(2.0, core.singleton_groups(8))
    ok = worst <= 1e-12 and abs(at_two - 1.0 / math.sqrt(2.0)) <= 1e-12
    report("criterion 1: threshold specializes to sqrt((t-1)/t)", ok,
           f"max deviation {worst:.2e}")


def test_criterion_2_decomposition_suite():
    rng = np.random.default_rng(2024)
    failures = 0
    worst_recon = 0.0
    for _ in range(1000):
        v, alpha, s, G = random_valid_input(rng, max_n=30, max_groups=10)
        dec = decomposition.polytope_decompose(v, alpha, s, G)
        check = decomposition.check_decomposition(dec, G)
        recon = sum(w * a for w, a in zip(dec.weights, dec.atoms))
        worst_recon = max(worst_recon, float(np.max(np.abs(recon - v))))
        if not check.passed or worst_recon > 1e-10:
            failures += 1
    report("criterion 2: 1000 random decompositions pass all checks", failures == 0,
           f"failures {failures}, worst reconstruction error {worst_recon:.2e}")


def test_criterion_3_rip_grip_oracle():
    rng = np.random.default_rng(7)
    worst_gap = 0.0
    ordering_ok = True
    for trial in range(100):
        n = int(rng.integers(4, 13))
        m = int(rng.integers(3, n + 1))
        A = sensing.gaussian_matrix(m, n, 1000 + trial)
        k = int(rng.integers(2, min(n, 6) + 1))
        exact = sensing.rip_constant(A, k).delta
        oracle = brute_force_rip(A.entries, k)
        worst_gap = max(worst_gap, abs(exact - oracle))
        G = random_structure(n, rng)
        if min(G.group_sizes()) <= k:
            if sensing.grip_constant(A, k, G).delta > exact + 1e-12:
                ordering_ok = False
    ok = worst_gap <= 1e-10 and ordering_ok
    report("criterion 3: singleton GRIP == brute-force RIP, GRIP <= RIP", ok,
           f"worst oracle gap {worst_gap:.2e}")


def test_criterion_4_theorem1_sampled(certified):
    kept, excluded = certified
    violations = 0
    for A, cert, G in kept:
        rep = certify.grnsp_holds_sampled(A, cert.k, G, cert.rho, cert.tau,
                                          trials=10_000, seed=99)
        violations += rep.violations
    report("criterion 4: sampled null-space property on certified instances",
           violations == 0,
           f"{len(kept)}/20 certified, exclusion rate {excluded / 20:.0%}, "
           f"violations {violations}")


def test_criterion_5_exact_recovery(certified):
    kept, _ = certified
    rng = np.random.default_rng(55)
    total, recovered = 0, 0
    for A, cert, G in kept:
        supports = core.enumerate_gks(G, cert.k)
        for _ in range(100):
            x = np.zeros(G.n)
            sup = supports[int(rng.integers(len(supports)))]
            x[np.asarray(sup.indices) - 1] = rng.standard_normal(len(sup.indices))
            result = decode.decode_bp(A, A.entries @ x)
            total += 1
            if np.linalg.norm(result.xhat - x) <= 1e-6:
                recovered += 1
    report("criterion 5: exact recovery of noiseless group-sparse truths",
           recovered == total, f"{recovered}/{total} recovered")


def test_criterion_6_error_bound_validity(certified):
    kept, _ = certified
    rng = np.random.default_rng(66)
    p_values = (1.0, 1.5, 2.0)
    trials_total = 500
    failures = 0
    done = 0
    while done < trials_total:
        for A, cert, G in kept:
            if done >= trials_total:
                break
            eps = 0.01 if done % 2 == 0 else 0.1
            supports = core.enumerate_gks(G, cert.k)
            x = np.zeros(G.n)
            sup = supports[int(rng.integers(len(supports)))]
            x[np.asarray(sup.indices) - 1] = rng.standard_normal(len(sup.indices))
            direction = rng.standard_normal(A.m)
            direction /= np.linalg.norm(direction)
            noise = eps * float(rng.uniform()) ** (1.0 / A.m) * direction
            y = A.entries @ x + noise
            result = decode.decode_bpdn(A, y, eps)
            sigma = core.group_sparsity_index(x, cert.k, G, "l1").value
            errs = decode.residual_norms(result.xhat, x, p_values)
            for p, err in zip(p_values, errs):
                bound = certify.error_bounds(cert, sigma, eps, p).bound_lp
                if err > bound:
                    failures += 1
            done += 1
    report("criterion 6: measured lp residuals within the certified bounds",
           failures == 0, f"{done} trials, bound violations {failures}")


def test_criterion_7_decoder_oracle():
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(200):
        m = int(rng.integers(3, 11))
        n = int(rng.integers(m + 1, 21))
        A = rng.standard_normal((m, n))
        x0 = np.zeros(n)
        idx = rng.choice(n, size=min(3, n), replace=False)
        x0[idx] = rng.standard_normal(idx.size)
        y = A @ x0
        mine = decode.decode_bp(A, y).objective
        oracle = linprog(np.ones(2 * n), A_eq=np.hstack([A, -A]), b_eq=y,
                         bounds=(0, None), method="highs")
        assert oracle.status == 0
        worst = max(worst, abs(mine - oracle.fun))
    lp_ok = worst <= 1e-8

    A = rng.standard_normal((6, 10))
    x0 = np.zeros(10)
    x0[[1, 5, 8]] = rng.standard_normal(3)
    y = A @ x0
    bp_obj = decode.decode_bp(A, y).objective
    objectives = [decode.decode_bpdn(A, y, eps).objective
                  for eps in (1e-1, 1e-2, 1e-4, 1e-6)]
    monotone = all(a <= b + 1e-8 for a, b in zip(objectives, objectives[1:]))
    limit_ok = abs(objectives[-1] - bp_obj) <= 1e-4
    ok = lp_ok and monotone and limit_ok
    report("criterion 7: LP decoder matches independent oracle; bpdn limit", ok,
           f"worst LP gap {worst:.2e}, eps-limit gap {abs(objectives[-1] - bp_obj):.2e}")


def test_criterion_8_knapsack_oracle():
    rng = np.random.default_rng(88)
    mismatches = 0
    ordering_failures = 0
    for _ in range(500):
        n = int(rng.integers(4, 16))
        g = int(rng.integers(1, min(n, 12) + 1))
        cuts = sorted(rng.choice(np.arange(1, n), size=g - 1, replace=False)) if g > 1 else []
        edges = [0] + [int(c) for c in cuts] + [n]
        G = core.make_group_structure(n, [list(range(a + 1, b + 1))
                                          for a, b in zip(edges, edges[1:])])
        x = rng.standard_normal(n)
        k = int(rng.integers(1, n + 1))
        norm = "l1" if rng.uniform() < 0.5 else "l2"
        res = core.group_sparsity_index(x, k, G, norm)
        value, groups = oracle_group_index(x, k, G, norm)
        if abs(res.value - value) > 1e-12 or res.witness_groups != groups:
            mismatches += 1
        if core.sparsity_index(x, k, 1).value > core.group_sparsity_index(x, k, G, "l1").value + 1e-12:
            ordering_failures += 1
    ok = mismatches == 0 and ordering_failures == 0
    report("criterion 8: knapsack index equals 2^g enumeration; ordering holds", ok,
           f"mismatches {mismatches}, ordering failures {ordering_failures}")
