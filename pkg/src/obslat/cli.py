"""Batch front end: solve problem files, run constructions, emit certificates.

Subcommands
-----------
solve        minimize a configured energy over a box, write solution +
             certificate JSON
oracle       same, using the brute-force active-set enumeration (n <= 12)
cutoff       build a certified cut-off function on a weighted graph
kantorovich  regularize a c-concave potential at an interpolation time
suite        run the property suites, write a CSV row per check

Exit codes: 0 success; 1 failing suite rows; 2 config/parse error;
3 solver failure (including non-convergence); 4 certificate or obstacle
assertion failure.

Config schemas (JSON; all keys sorted in outputs, floats via repr)
------------------------------------------------------------------
solve/oracle::

    {"energy": <energy>, "box": {"lo": spec, "hi": spec},
     "solver": {"method": "psor"|"projected_gradient", "tol": float,
                "max_iter": int, "omega": float},
     "certificate_tol": float}

where <energy> is one of::

    {"kind": "quadratic", "n": int, "triplets": [[i, j, value], ...],
     "b": [...]}                      # symmetric entries both listed
    {"kind": "quadratic_file", "path": "A.txt", "b": [...]}
                                      # triplet text: "n nnz" header,
                                      # then "i j value" lines, 0-based
    {"kind": "graph", "nodes": int, "edges": [[i, j, w], ...],
     "dirichlet": [...]}
    {"kind": "kernel", "n": int, "p": float, "pairs": [[i, j, w], ...],
     "exterior": [[i, d], ...]}
    {"kind": "fractional_1d", "n": int, "h": float, "s": float,
     "p": float, "collar": int}

and a box side spec is a number (constant), a list, or null for an absent
side (encoded at +-1e30).

cutoff::

    {"graph": {"nodes": int, "edges": [[i, j, w], ...]},
     "core": [...], "region": [...], "paper_radius": bool,
     "solver": {...}}

kantorovich::

    {"graph": {...}, "potential": [...], "t": float,
     "cc_regularize": bool, "solver": {...}}

suite::

    {"seed": int, "checks": [names...], "paper_radius": bool}

Outputs are deterministic for a fixed config and seed: randomness comes
only from numpy PCG64 generators seeded per check, reductions run in fixed
order, and JSON/CSV serialization is canonical.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .certificates import certificate_report, ls_certificate
from .energies import KernelEnergy, QuadraticEnergy, fractional_kernel_1d, graph_dirichlet
from .errors import (
    CertificateError,
    ConstructionError,
    DimensionMismatch,
    NondifferentiableError,
    ObstacleOrderError,
    PreconditionError,
    SolverError,
)
from .lattice import UNBOUNDED, OrderInterval
from .metric import (
    GraphSpace,
    build_cutoff,
    coincidence_cc_report,
    cutoff_obstacles,
    kantorovich_regularize,
)
from .solvers import brute_force_active_set, solve_projected_gradient, solve_psor
from .suite import CHECKS, run_suite

EXIT_OK = 0
EXIT_SUITE_FAIL = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_CERTIFICATE = 4


class ConfigError(Exception):
    pass


def _load_config(args) -> dict:
    if not args.config:
        raise ConfigError("--config PATH is required for this command")
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}") from err
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"malformed JSON in {args.config}: {err}") from err
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _build_energy(cfg: dict):
    try:
        spec = cfg["energy"]
        kind = spec["kind"]
        if kind == "quadratic":
            return QuadraticEnergy.from_triplets(int(spec["n"]), spec["triplets"],
                                                 spec.get("b"))
        if kind == "quadratic_file":
            text = Path(spec["path"]).read_text(encoding="utf-8")
            return QuadraticEnergy.from_triplet_text(text, spec.get("b"))
        if kind == "graph":
            return graph_dirichlet(int(spec["nodes"]), spec["edges"],
                                   spec.get("dirichlet", ()))
        if kind == "kernel":
            return KernelEnergy.from_json_dict(spec)
        if kind == "fractional_1d":
            return fractional_kernel_1d(int(spec["n"]), float(spec["h"]),
                                        float(spec["s"]), float(spec["p"]),
                                        int(spec["collar"]))
        raise ConfigError(f"unknown energy kind {kind!r}")
    except (KeyError, TypeError, ValueError, OSError) as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(f"bad energy specification: {err}") from err


def _box_side(spec, n: int, default: float) -> np.ndarray:
    if spec is None:
        return np.full(n, default)
    if isinstance(spec, (int, float)):
        return np.full(n, float(spec))
    arr = np.asarray(spec, dtype=float)
    if arr.shape != (n,):
        raise ConfigError(f"box side has length {arr.size}, expected {n}")
    return arr


def _build_box(cfg: dict, n: int) -> OrderInterval:
    spec = cfg.get("box", {})
    try:
        lo = _box_side(spec.get("lo"), n, -UNBOUNDED)
        hi = _box_side(spec.get("hi"), n, UNBOUNDED)
        return OrderInterval(lo, hi)
    except (TypeError, ValueError) as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(f"bad box specification: {err}") from err


def _solver_params(cfg: dict, args, default_tol: float) -> dict:
    params = dict(cfg.get("solver", {}))
    if args.tol is not None:
        params["tol"] = args.tol
    params.setdefault("tol", default_tol)
    return params


def _run_solver(energy, box, params: dict, oracle: bool):
    if oracle:
        return brute_force_active_set(energy, box)
    method = params.get("method")
    if method is None:
        method = "psor" if isinstance(energy, QuadraticEnergy) else "projected_gradient"
    if method == "psor":
        return solve_psor(energy, box, tol=params["tol"],
                          max_iter=int(params.get("max_iter", 20000)),
                          omega=float(params.get("omega", 1.5)))
    if method == "projected_gradient":
        return solve_projected_gradient(energy, box, tol=params["tol"],
                                        max_iter=int(params.get("max_iter", 50000)))
    raise ConfigError(f"unknown solver method {method!r}")


def _cmd_solve(args, oracle: bool = False) -> int:
    cfg = _load_config(args)
    energy = _build_energy(cfg)
    box = _build_box(cfg, energy.n)
    params = _solver_params(cfg, args, default_tol=1e-9)
    out = _out_dir(args)
    solution = _run_solver(energy, box, params, oracle)
    payload = solution.to_json_dict()
    payload["method"] = "oracle" if oracle else params.get(
        "method", "psor" if isinstance(energy, QuadraticEnergy) else "projected_gradient")
    payload["tol"] = params["tol"]
    _write_json(out / "solution.json", payload)
    if not solution.converged:
        print(f"solver did not converge within budget (kkt residual "
              f"{solution.kkt_residual:.3e})", file=sys.stderr)
        return EXIT_SOLVER
    cert_tol = float(cfg.get("certificate_tol", 10.0 * params["tol"]))
    cert = ls_certificate(energy, box, solution, cert_tol)
    _write_json(out / "certificate.json", certificate_report(energy, box, solution, cert))
    return EXIT_OK if cert.passed else EXIT_CERTIFICATE


def cmd_solve(args) -> int:
    return _cmd_solve(args, oracle=False)


def cmd_oracle(args) -> int:
    return _cmd_solve(args, oracle=True)


def _build_space(cfg: dict) -> GraphSpace:
    try:
        g = cfg["graph"]
        return GraphSpace.from_graph(int(g["nodes"]), g["edges"])
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigError(f"bad graph specification: {err}") from err


def cmd_cutoff(args) -> int:
    cfg = _load_config(args)
    space = _build_space(cfg)
    paper_radius = bool(args.paper_radius or cfg.get("paper_radius", False))
    params = _solver_params(cfg, args, default_tol=1e-9)
    try:
        core, region = cfg["core"], cfg["region"]
    except KeyError as err:
        raise ConfigError(f"missing config key: {err}") from err
    out = _out_dir(args)
    phi, psi, r2 = cutoff_obstacles(space, core, region, paper_radius=paper_radius)
    omega, cert = build_cutoff(space, core, region, tol=params["tol"],
                               max_iter=int(params.get("max_iter", 20000)),
                               relaxation=float(params.get("omega", 1.5)),
                               paper_radius=paper_radius,
                               cert_tol=cfg.get("certificate_tol"))
    box = OrderInterval(phi, psi)
    report = certificate_report(space.dirichlet_energy, box, omega, cert, metric=space)
    _write_json(out / "cutoff.json", {
        "omega": omega.tolist(),
        "phi": phi.tolist(),
        "psi": psi.tolist(),
        "r2": r2,
        "paper_radius": paper_radius,
        "sup_laplacian": report["sup_laplacian"],
    })
    _write_json(out / "certificate.json", report)
    return EXIT_OK


def cmd_kantorovich(args) -> int:
    cfg = _load_config(args)
    space = _build_space(cfg)
    params = _solver_params(cfg, args, default_tol=1e-9)
    try:
        phi = np.asarray(cfg["potential"], dtype=float)
        t = float(cfg["t"])
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigError(f"bad potential specification: {err}") from err
    out = _out_dir(args)
    eta, pair, cert = kantorovich_regularize(
        space, phi, t,
        tol=params["tol"],
        max_iter=int(params.get("max_iter", 20000)),
        relaxation=float(params.get("omega", 1.5)),
        cc_regularize=bool(cfg.get("cc_regularize", False)),
        cert_tol=cfg.get("certificate_tol"),
    )
    box = OrderInterval(pair.lo, pair.hi)
    report = certificate_report(space.dirichlet_energy, box, eta, cert, metric=space)
    _write_json(out / "kantorovich.json", {
        "eta": eta.tolist(),
        "phi": pair.phi.tolist(),
        "phi_c": pair.phi_c.tolist(),
        "lo": pair.lo.tolist(),
        "hi": pair.hi.tolist(),
        "t": pair.t,
        "coincidence_set": pair.coincidence_set.tolist(),
        "cc_report": coincidence_cc_report(space, pair, eta),
        "sup_laplacian": report["sup_laplacian"],
    })
    _write_json(out / "certificate.json", report)
    return EXIT_OK


def cmd_suite(args) -> int:
    cfg = _load_config(args) if args.config else {}
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    checks = cfg.get("checks")
    if checks is not None:
        unknown = [c for c in checks if c not in CHECKS]
        if unknown:
            raise ConfigError(f"unknown checks: {unknown}")
    paper_radius = bool(args.paper_radius or cfg.get("paper_radius", False))
    rows, all_pass = run_suite(seed=seed, checks=checks, paper_radius=paper_radius)
    out = _out_dir(args)
    with open(out / "suite.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["check_name", "n_instances", "worst_value", "threshold", "pass"])
        for row in rows:
            writer.writerow([row["check_name"], row["n_instances"],
                             row["worst_value"], row["threshold"], row["pass"]])
    _write_json(out / "suite_summary.json", {
        "seed": seed,
        "generator": "numpy PCG64 seeded per check as [seed, crc32(check_name)]",
        "paper_radius": paper_radius,
        "all_pass": all_pass,
        "n_rows": len(rows),
        "failed_checks": [r["check_name"] for r in rows if not r["pass"]],
    })
    for row in rows:
        if not row["pass"]:
            print(f"FAIL {row['check_name']}: worst {row['worst_value']:.6e} "
                  f"exceeds {row['threshold']:.1e}", file=sys.stderr)
    return EXIT_OK if all_pass else EXIT_SUITE_FAIL


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="obslat",
        description="Double obstacle problems on finite lattices with "
                    "Lewy-Stampacchia certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "solve": (cmd_solve, "solve an obstacle problem and certify it"),
        "oracle": (cmd_oracle, "solve by brute-force enumeration (n <= 12)"),
        "cutoff": (cmd_cutoff, "build a certified cut-off function"),
        "kantorovich": (cmd_kantorovich, "regularize a Kantorovich potential"),
        "suite": (cmd_suite, "run the property suites and write a CSV report"),
    }
    for name, (fn, help_text) in commands.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", type=str, default=None, help="JSON config file")
        sp.add_argument("--seed", type=int, default=None, help="random seed (suite)")
        sp.add_argument("--out", type=str, default=".", help="output directory")
        sp.add_argument("--tol", type=float, default=None, help="solver tolerance override")
        sp.add_argument("--paper-radius", action="store_true",
                        help="use r^2 = D0^2/2 in the cut-off construction")
        sp.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConstructionError, PreconditionError, DimensionMismatch) as err:
        print(f"invalid problem data: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, NondifferentiableError) as err:
        print(f"solver error: {err}", file=sys.stderr)
        return EXIT_SOLVER
    except (CertificateError, ObstacleOrderError) as err:
        print(f"certificate failure: {err}", file=sys.stderr)
        return EXIT_CERTIFICATE


if __name__ == "__main__":
    sys.exit(main())
