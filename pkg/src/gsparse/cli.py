"""Command-line front end: file I/O, pipelines, and experiment sweeps.

Exit codes are uniform across subcommands: 0 for success (or a valid
verdict), 2 for a clean run with a negative verdict (invalid certificate,
failed checks), 1 for errors (bad files, bad config).

All JSON output is canonical (sorted keys, fixed separators) and CSV uses
17 significant digits, so outputs are byte-deterministic given config+seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from gsparse import certify as certify_mod
from gsparse import core, decode, decomposition, sensing

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2


# ---------------------------------------------------------------------------
# serialization

def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(", ", ": "), indent=1) + "\n"


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps(obj))


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def groups_to_json(G: core.GroupStructure) -> dict:
    return {"n": G.n, "groups": [list(gr) for gr in G.groups]}


def groups_from_json(obj) -> core.GroupStructure:
    return core.make_group_structure(obj["n"], obj["groups"])


def vector_to_json(x) -> dict:
    return {"data": [float(v) for v in np.asarray(x, dtype=float)]}


def vector_from_json(obj) -> np.ndarray:
    return np.asarray(obj["data"], dtype=float)


def matrix_to_json(A: sensing.SensingMatrix) -> dict:
    return {
        "rows": A.m,
        "cols": A.n,
        "data": [float(v) for v in A.entries.ravel()],
        "provenance": A.provenance,
    }


def matrix_from_json(obj) -> sensing.SensingMatrix:
    entries = np.asarray(obj["data"], dtype=float).reshape(obj["rows"], obj["cols"])
    return sensing.SensingMatrix(
        m=obj["rows"], n=obj["cols"], entries=entries, provenance=obj.get("provenance", {})
    )


def decomposition_to_json(dec: decomposition.ConvexDecomposition) -> dict:
    return {
        "alpha": dec.alpha,
        "s": dec.s,
        "weights": [float(w) for w in dec.weights],
        "atoms": [[float(v) for v in atom] for atom in dec.atoms],
    }


def certificate_to_json(cert: certify_mod.GrnspCertificate) -> dict:
    return {
        "t": cert.t, "k": cert.k, "delta": cert.delta, "mu": cert.mu,
        "a": cert.a, "b": cert.b, "c": cert.c, "rho": cert.rho, "tau": cert.tau,
        "valid": cert.valid, "threshold": cert.threshold, "reason": cert.reason,
    }


def report_to_json(report: sensing.IsometryReport) -> dict:
    return {
        "order": report.order, "delta": report.delta, "kind": report.kind,
        "exact": report.exact, "extremal_support": list(report.extremal_support),
        "eigen_range": list(report.eigen_range),
    }


def result_to_json(result: decode.DecodeResult) -> dict:
    return {
        "xhat": [float(v) for v in result.xhat],
        "objective": result.objective,
        "feasibility_gap": result.feasibility_gap,
        "iterations": result.iterations,
        "converged": result.converged,
        "method": result.method,
    }


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


# ---------------------------------------------------------------------------
# experiment config

@dataclass
class ExperimentConfig:
    n: int
    m: int
    k: int
    t: float
    trials: int
    seed: int = 0
    eps: float = 0.0
    noise_model: str = "none"  # "none" or "gaussian_ball"
    group_size: int = 0  # 0 means explicit groups
    groups: list = field(default_factory=list)
    p_list: list = field(default_factory=lambda: [1.0, 2.0])
    m_sweep: list = field(default_factory=list)

    @classmethod
    def from_json(cls, obj) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in obj.items() if k in known})

    def structure(self) -> core.GroupStructure:
        if self.groups:
            return core.make_group_structure(self.n, self.groups)
        if self.group_size < 1:
            raise ValueError("config needs either explicit groups or a positive group_size")
        if self.n % self.group_size != 0:
            raise ValueError(
                f"group_size {self.group_size} does not divide n = {self.n}; "
                "provide explicit groups instead"
            )
        blocks = [
            list(range(i * self.group_size + 1, (i + 1) * self.group_size + 1))
            for i in range(self.n // self.group_size)
        ]
        return core.make_group_structure(self.n, blocks)

    def validate(self):
        tk = self.t * self.k
        if abs(tk - round(tk)) > 1e-9:
            raise ValueError(f"t * k must be an integer, got {self.t} * {self.k} = {tk}")
        if self.m > self.n:
            raise ValueError(f"m = {self.m} exceeds n = {self.n}")
        if self.trials < 0:
            raise ValueError("trials must be nonnegative")
        if self.noise_model not in ("none", "gaussian_ball"):
            raise ValueError(f"unknown noise model {self.noise_model!r}")
        G = self.structure()
        if G.m_max > self.k:
            raise ValueError(
                f"largest group has {G.m_max} members > k = {self.k}; "
                "every group must fit inside the sparsity budget"
            )
        for p in self.p_list:
            if not 1.0 <= p <= 2.0:
                raise ValueError(f"p values must be in [1, 2], got {p}")
        return G


def random_group_sparse(G: core.GroupStructure, k: int, rng) -> np.ndarray:
    """Standard normal values on a uniformly chosen maximal group k-sparse support."""
    supports = [s for s in core.enumerate_gks(G, k) if s.indices]
    support = supports[int(rng.integers(len(supports)))]
    x = np.zeros(G.n)
    idx = np.asarray(support.indices, dtype=int) - 1
    x[idx] = rng.standard_normal(idx.size)
    return x


def ball_noise(m: int, eps: float, rng) -> np.ndarray:
    """Uniform draw from the closed eps-ball, so the noise bound holds surely."""
    if eps == 0.0:
        return np.zeros(m)
    direction = rng.standard_normal(m)
    direction /= np.linalg.norm(direction)
    radius = eps * float(rng.uniform()) ** (1.0 / m)
    return radius * direction


def run_trials(config: ExperimentConfig, G: core.GroupStructure = None):
    """Execute the generate -> certify -> decode -> check pipeline per trial."""
    if G is None:
        G = config.validate()
    tk = int(round(config.t * config.k))
    rows = []
    for trial in range(config.trials):
        seed_i = config.seed + trial
        row = {
            "trial": trial, "delta": math.nan, "threshold": math.nan,
            "certified": False, "success": False, "error": "",
        }
        for p in config.p_list:
            row[f"err_{_fmt(p)}"] = math.nan
            row[f"bound_{_fmt(p)}"] = math.nan
        try:
            A = sensing.gaussian_matrix(config.m, config.n, seed_i)
            report = sensing.grip_constant(A, tk, G)
            row["delta"] = report.delta
            row["threshold"] = certify_mod.delta_threshold(config.t, G)
            cert = None
            if 0.0 < report.delta < 1.0:
                cert = certify_mod.grnsp_constants(config.t, config.k, report.delta, G)
                row["certified"] = cert.valid
            rng = np.random.default_rng(seed_i)
            x_true = random_group_sparse(G, config.k, rng)
            eps = config.eps if config.noise_model != "none" else 0.0
            noise = ball_noise(config.m, eps, rng) if config.noise_model == "gaussian_ball" else np.zeros(config.m)
            y = A.entries @ x_true + noise
            if eps > 0.0:
                result = decode.decode_bpdn(A, y, eps)
            else:
                result = decode.decode_bp(A, y)
            sigma = core.group_sparsity_index(x_true, config.k, G, norm="l1").value
            errs = decode.residual_norms(result.xhat, x_true, config.p_list)
            row["success"] = bool(np.linalg.norm(result.xhat - x_true) <= 1e-6)
            for p, err in zip(config.p_list, errs):
                row[f"err_{_fmt(p)}"] = err
                if cert is not None and cert.valid:
                    budget = certify_mod.error_bounds(cert, sigma, eps, p)
                    row[f"bound_{_fmt(p)}"] = budget.bound_lp
        except Exception as exc:  # record the failure, keep sweeping
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def trial_columns(config: ExperimentConfig) -> list:
    cols = ["trial", "delta", "threshold", "certified", "success"]
    for p in config.p_list:
        cols += [f"err_{_fmt(p)}", f"bound_{_fmt(p)}"]
    return cols + ["error"]


def write_trial_csv(path, config: ExperimentConfig, rows):
    cols = trial_columns(config)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for row in sorted(rows, key=lambda r: r["trial"]):
            writer.writerow([_fmt(row[c]) for c in cols])


def summarize(rows) -> dict:
    total = len(rows)
    errors = sum(1 for r in rows if r["error"])
    clean = [r for r in rows if not r["error"]]
    certified = sum(1 for r in clean if r["certified"])
    success = sum(1 for r in clean if r["success"])
    return {
        "trials": total,
        "errors": errors,
        "certified": certified,
        "success": success,
        "success_rate": success / total if total else 0.0,
    }


# ---------------------------------------------------------------------------
# subcommands

def cmd_gen(args) -> int:
    config = ExperimentConfig.from_json(load_json(args.config))
    if args.seed is not None:
        config.seed = args.seed
    G = config.validate()
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    A = sensing.gaussian_matrix(config.m, config.n, config.seed)
    rng = np.random.default_rng(config.seed)
    x_true = random_group_sparse(G, config.k, rng)
    eps = config.eps if config.noise_model == "gaussian_ball" else 0.0
    noise = ball_noise(config.m, eps, rng)
    y = A.entries @ x_true + noise
    write_json(os.path.join(out, "matrix.json"), matrix_to_json(A))
    write_json(os.path.join(out, "groups.json"), groups_to_json(G))
    write_json(os.path.join(out, "truth.json"), vector_to_json(x_true))
    write_json(os.path.join(out, "measurements.json"),
               {"matrix": matrix_to_json(A), "y": list(map(float, y)), "eps": eps})
    if not args.quiet:
        print(f"wrote matrix/groups/truth/measurements to {out}")
    return EXIT_OK


def cmd_certify(args) -> int:
    A = matrix_from_json(load_json(args.matrix))
    G = groups_from_json(load_json(args.groups))
    tk = args.t * args.k
    if abs(tk - round(tk)) > 1e-9:
        raise ValueError(f"t * k must be an integer, got {tk}")
    report = sensing.grip_constant(A, int(round(tk)), G)
    threshold = certify_mod.delta_threshold(args.t, G)
    payload = {"delta": report.delta, "threshold": threshold, "margin": threshold - report.delta}
    if 0.0 < report.delta < 1.0:
        cert = certify_mod.grnsp_constants(args.t, args.k, report.delta, G)
        payload.update(certificate_to_json(cert))
        valid = cert.valid
    else:
        # delta = 0 certifies trivially; delta >= 1 makes recovery impossible
        valid = report.delta < 1.0
        payload.update({"valid": valid, "t": args.t, "k": args.k,
                        "reason": "" if valid else "recovery_impossible"})
    _emit(args, payload)
    return EXIT_OK if valid else EXIT_NEGATIVE


def cmd_decode(args) -> int:
    problem = load_json(args.problem)
    A = matrix_from_json(problem["matrix"])
    y = np.asarray(problem["y"], dtype=float)
    eps = float(problem.get("eps", 0.0))
    if eps > 0.0:
        result = decode.decode_bpdn(A, y, eps)
    else:
        result = decode.decode_bp(A, y)
    _emit(args, result_to_json(result))
    return EXIT_OK if result.converged else EXIT_NEGATIVE


def cmd_run(args) -> int:
    config = ExperimentConfig.from_json(load_json(args.config))
    if args.seed is not None:
        config.seed = args.seed
    G = config.validate()
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    rows = run_trials(config, G)
    write_trial_csv(os.path.join(out, "trials.csv"), config, rows)
    write_json(os.path.join(out, "summary.json"), summarize(rows))
    if not args.quiet:
        print(f"wrote trials.csv and summary.json to {out}")
    return EXIT_OK


def cmd_phase(args) -> int:
    config = ExperimentConfig.from_json(load_json(args.config))
    if args.seed is not None:
        config.seed = args.seed
    if not config.m_sweep:
        raise ValueError("phase requires a nonempty m_sweep in the config")
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "phase.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "trials", "success_rate_group", "success_rate_singleton"])
        for m in config.m_sweep:
            grouped = ExperimentConfig.from_json({**config.__dict__, "m": int(m), "m_sweep": []})
            G = grouped.validate()
            rate_group = summarize(run_trials(grouped, G))["success_rate"]
            control = ExperimentConfig.from_json(
                {**config.__dict__, "m": int(m), "m_sweep": [], "group_size": 1, "groups": []}
            )
            rate_single = summarize(run_trials(control, control.validate()))["success_rate"]
            writer.writerow([m, grouped.trials, _fmt(rate_group), _fmt(rate_single)])
    if not args.quiet:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_decompose(args) -> int:
    v = vector_from_json(load_json(args.vector))
    G = groups_from_json(load_json(args.groups))
    dec = decomposition.polytope_decompose(v, args.alpha, args.s, G)
    check = decomposition.check_decomposition(dec, G)
    payload = decomposition_to_json(dec)
    payload["check"] = {
        "support_contained": check.support_contained,
        "l1_preserved": check.l1_preserved,
        "group_sparse": check.group_sparse,
        "reconstructs": check.reconstructs,
        "weights_simplex": check.weights_simplex,
        "l2_bound": check.l2_bound,
        "passed": check.passed,
    }
    _emit(args, payload)
    return EXIT_OK if check.passed else EXIT_NEGATIVE


def cmd_index(args) -> int:
    x = vector_from_json(load_json(args.vector))
    plain = core.sparsity_index(x, args.k, args.p)
    payload = {
        "sparsity_index": plain.value,
        "witness": list(plain.witness),
    }
    if args.groups:
        G = groups_from_json(load_json(args.groups))
        grouped = core.group_sparsity_index(x, args.k, G, norm=args.norm)
        payload["group_sparsity_index"] = grouped.value
        payload["group_witness"] = list(grouped.witness)
        payload["group_witness_groups"] = list(grouped.witness_groups)
    _emit(args, payload)
    return EXIT_OK


def cmd_grip(args) -> int:
    A = matrix_from_json(load_json(args.matrix))
    if args.groups:
        G = groups_from_json(load_json(args.groups))
        if args.trials:
            report = sensing.grip_lower_bound(A, args.k, G, args.trials, args.seed or 0)
        else:
            report = sensing.grip_constant(A, args.k, G)
    else:
        report = sensing.rip_constant(A, args.k)
    _emit(args, report_to_json(report))
    return EXIT_OK


def _emit(args, payload: dict):
    if getattr(args, "format", "json") == "csv":
        flat = {k: v for k, v in payload.items() if not isinstance(v, (list, dict))}
        text = ",".join(flat) + "\n" + ",".join(_fmt(v) for v in flat.values()) + "\n"
    else:
        text = dumps(payload)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        if not args.quiet:
            print(f"wrote {args.out}")
    elif not args.quiet:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsparse",
        description="Group-sparse recovery toolkit: certificates, decompositions, decoders.",
    )
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, help="output file or directory")
    parser.add_argument("--format", choices=["json", "csv"], default="json")
    parser.add_argument("--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate matrix/groups/truth/measurement files")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("certify", help="isometry constant and recovery certificate")
    p.add_argument("--matrix", required=True)
    p.add_argument("--groups", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("decode", help="l1-decode a measurement problem file")
    p.add_argument("--problem", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("run", help="full generate-certify-decode-check sweep")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("phase", help="success probability vs measurement count")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("decompose", help="convex polytope decomposition + checks")
    p.add_argument("--vector", required=True)
    p.add_argument("--groups", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--s", type=int, required=True)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("index", help="(group) sparsity indices of a vector")
    p.add_argument("--vector", required=True)
    p.add_argument("--groups", default=None)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--norm", choices=["l1", "l2"], default="l1")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("grip", help="exact or sampled isometry constants")
    p.add_argument("--matrix", required=True)
    p.add_argument("--groups", default=None)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trials", type=int, default=0)
    p.set_defaults(func=cmd_grip)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
