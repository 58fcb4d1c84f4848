"""Property suites: every library-level invariant as a pass/fail row.

Each check function returns rows of the form::

    {"check_name": str, "n_instances": int, "worst_value": float,
     "threshold": float, "pass": bool}

where ``worst_value`` is the largest measured violation (or the measured
quantity for informational rows, whose threshold is +inf).  Checks draw
their randomness from a generator seeded by (seed, crc32(check name)), so
any subset of checks is reproducible independently of the others.
"""

from __future__ import annotations

import math
import zlib

import numpy as np

from . import instances as inst
from .certificates import (
    free_set_harmonicity,
    harmonic_extension,
    ls_certificate,
    maximum_principle_check,
)
from .energies import (
    QuadraticEnergy,
    scalar_submodularity_inequality,
    submodularity_check,
    t_monotonicity_check,
    z_matrix_violation,
)
from .errors import ObslatError, ObstacleOrderError
from .lattice import OrderInterval, UNBOUNDED, clamp, join, meet, rk_join, rk_meet
from .metric import (
    c_transform,
    coincidence_cc_report,
    cutoff_obstacles,
    hopf_lax,
    interpolation_duality_check,
)
from .solvers import brute_force_active_set, solve_projected_gradient, solve_psor


def _rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(name.encode("utf-8"))])


def _row(name: str, n: int, worst: float, threshold: float) -> dict:
    worst = float(worst) + 0.0
    return {
        "check_name": name,
        "n_instances": int(n),
        "worst_value": worst,
        "threshold": float(threshold),
        "pass": bool(worst <= threshold),
    }


def check_lattice_identities(seed: int, n_pairs: int = 200) -> list:
    rng = _rng(seed, "lattice_identities")
    worst_absorb = worst_decomp = worst_clamp = 0.0
    for _ in range(n_pairs):
        n = int(rng.integers(1, 9))
        u, v = rng.normal(size=n), rng.normal(size=n)
        worst_absorb = max(
            worst_absorb,
            float(np.max(np.abs(join(u, meet(u, v)) - u))),
            float(np.max(np.abs(meet(u, join(u, v)) - u))),
        )
        worst_decomp = max(
            worst_decomp,
            float(np.max(np.abs(np.maximum(u, 0) + np.minimum(u, 0) - u))),
        )
        box = inst.random_box(rng, n)
        d_clamped = np.max(np.abs(clamp(u, box) - clamp(v, box)))
        worst_clamp = max(worst_clamp, float(d_clamped - np.max(np.abs(u - v))))
    rows = [
        _row("lattice_absorption", n_pairs, worst_absorb, 0.0),
        _row("lattice_decomposition", n_pairs, worst_decomp, 0.0),
        _row("lattice_clamp_nonexpansive", n_pairs, worst_clamp, 0.0),
    ]
    # Riesz-Kantorovich formula against vertex enumeration (the sup of a
    # linear functional over [0, x] sits at a vertex, so enumeration is exact).
    worst_rk = 0.0
    for _ in range(n_pairs // 2):
        n = int(rng.integers(1, 9))
        l, m = rng.normal(size=n), rng.normal(size=n)
        x = np.abs(rng.normal(size=n))
        best_hi, best_lo = -math.inf, math.inf
        for mask in range(1 << n):
            z = np.array([x[i] if mask >> i & 1 else 0.0 for i in range(n)])
            val = float(l @ z + m @ (x - z))
            best_hi, best_lo = max(best_hi, val), min(best_lo, val)
        worst_rk = max(
            worst_rk,
            abs(rk_join(l, m, x) - best_hi),
            abs(rk_meet(l, m, x) - best_lo),
            abs(rk_join(l, m, x) - float(join(l, m) @ x)),
            abs(rk_meet(l, m, x) - float(meet(l, m) @ x)),
        )
    rows.append(_row("lattice_rk_formula", n_pairs // 2, worst_rk, 1e-9))
    return rows


def check_zmatrix_equivalence(seed: int, n_matrices: int = 100) -> list:
    rng = _rng(seed, "zmatrix_equivalence")
    worst = 0.0
    for k in range(n_matrices):
        n = int(rng.integers(2, 13))
        a = inst.random_symmetric_matrix(rng, n, z_matrix=bool(k % 2))
        off = a[~np.eye(n, dtype=bool)]
        expect = bool(np.max(off) > 1e-12)
        viol = z_matrix_violation(a)
        if (viol is not None) != expect:
            worst = math.inf
            continue
        if viol is not None:
            _, delta = submodularity_check(lambda x: 0.5 * float(x @ a @ x), viol.u, viol.v)
            worst = max(worst, abs(delta - viol.entry))
    return [_row("zmatrix_equivalence", n_matrices, worst, 1e-12)]


def check_t_monotonicity(seed: int, n_pairs: int = 300) -> list:
    rng = _rng(seed, "t_monotonicity")
    worst = 0.0
    for k in range(n_pairs):
        kind = k % 3
        if kind == 0:
            n = int(rng.integers(2, 20))
            energy = inst.random_submodular_quadratic(rng, n)
        else:
            n = int(rng.integers(2, 12))
            energy = inst.random_kernel_pair(rng, n, p=2.0 if kind == 1 else 3.0)
        u, v = rng.normal(size=n), rng.normal(size=n)
        _, mu = t_monotonicity_check(energy, u, v)
        worst = max(worst, -mu)
    return [_row("t_monotonicity", n_pairs, worst, 1e-10)]


def check_scalar_sub2(seed: int, n_samples: int = 2000) -> list:
    rng = _rng(seed, "scalar_sub2")
    worst = 0.0
    for p in (1.5, 2.0, 3.0):
        quads = rng.uniform(-2.0, 2.0, size=(n_samples, 4))
        for x1, x2, y1, y2 in quads:
            _, margin = scalar_submodularity_inequality(p, x1, x2, y1, y2)
            worst = max(worst, -margin)
    return [_row("scalar_sub2", 3 * n_samples, worst, 1e-12)]


def check_oracle_equivalence(seed: int, n_instances: int = 12) -> list:
    rng = _rng(seed, "oracle_equivalence")
    worst = 0.0
    for _ in range(n_instances):
        n = int(rng.integers(2, 10))
        energy = inst.random_submodular_quadratic(rng, n)
        box = inst.random_box(rng, n)
        sol = solve_psor(energy, box, tol=1e-9)
        oracle = brute_force_active_set(energy, box)
        worst = max(worst, float(np.max(np.abs(sol.u - oracle.u))))
    return [_row("oracle_equivalence", n_instances, worst, 1e-7)]


def check_ls_quadratic(seed: int, n_instances: int = 40) -> list:
    rng = _rng(seed, "ls_certificate_quadratic")
    worst_slack = worst_harm = worst_consequence = 0.0
    for k in range(n_instances):
        n = int(rng.integers(2, 40))
        energy = inst.random_submodular_quadratic(rng, n)
        box = (inst.random_lower_obstacle_box(rng, n) if k % 4 == 3
               else inst.random_box(rng, n))
        sol = solve_psor(energy, box, tol=1e-9)
        if not sol.converged:
            worst_slack = math.inf
            continue
        cert = ls_certificate(energy, box, sol, 1e-8)
        worst_slack = max(worst_slack, -cert.lower_slack_min, -cert.upper_slack_min)
        _, _, harm = free_set_harmonicity(energy, box, sol, 1e-9)
        worst_harm = max(worst_harm, harm)
        # Conclusion of the certificate: the minimizer's Laplacian is bounded
        # by the obstacle Laplacians (absent sides contribute zero).
        lap_u = np.max(np.abs(-cert.g_u))
        lap_lo = 0.0 if cert.g_lo is None else np.max(np.abs(np.minimum(-cert.g_lo, 0.0)))
        lap_hi = 0.0 if cert.g_hi is None else np.max(np.abs(np.maximum(-cert.g_hi, 0.0)))
        worst_consequence = max(worst_consequence, float(lap_u - max(lap_lo, lap_hi)))
    return [
        _row("ls_certificate_quadratic", n_instances, worst_slack, 1e-8),
        _row("ls_free_set_harmonicity", n_instances, worst_harm, 1e-9),
        _row("ls_laplacian_consequence", n_instances, worst_consequence, 1e-8),
    ]


def check_ls_fractional(seed: int, n_instances: int = 6) -> list:
    rng = _rng(seed, "ls_certificate_fractional")
    worst_slack = worst_ascent = 0.0
    for _ in range(n_instances):
        energy, box, _, _ = inst.random_fractional_instance(rng, n_max=32)
        energies = []
        sol = solve_projected_gradient(
            energy, box, tol=1e-8, max_iter=200000,
            step_callback=lambda u, f: energies.append(f),
        )
        if not sol.converged:
            worst_slack = math.inf
            continue
        if len(energies) > 1:
            steps = np.diff(np.asarray(energies))
            worst_ascent = max(worst_ascent, float(np.max(steps, initial=0.0)))
        cert = ls_certificate(energy, box, sol, 1e-6)
        worst_slack = max(worst_slack, -cert.lower_slack_min, -cert.upper_slack_min)
    return [
        _row("ls_certificate_fractional", n_instances, worst_slack, 1e-6),
        _row("pg_energy_descent", n_instances, worst_ascent, 1e-12),
    ]


def check_psor_monotone(seed: int, n_instances: int = 10) -> list:
    rng = _rng(seed, "psor_monotone")
    worst = 0.0
    for _ in range(n_instances):
        n = int(rng.integers(3, 25))
        energy = inst.random_submodular_quadratic(rng, n)
        box = inst.random_box(rng, n)
        trace = [box.hi.copy()]
        solve_psor(energy, box, tol=1e-9, omega=1.0, u0=box.hi,
                   sweep_callback=trace.append)
        arr = np.asarray(trace)
        worst = max(worst, float(np.max(np.diff(arr, axis=0), initial=0.0)))
        if not all(box.contains(u) for u in trace):
            worst = math.inf
    return [_row("psor_monotone_from_above", n_instances, worst, 0.0)]


def check_comparison_principle(seed: int, n_instances: int = 20) -> list:
    rng = _rng(seed, "comparison_principle")
    worst = 0.0
    for k in range(n_instances):
        if k % 2 == 0:
            side = int(rng.integers(3, 7))
            base = inst.grid_edges(side, side)
            nodes = side * side
            boundary = inst.grid_boundary(side, side)
        else:
            nodes = int(rng.integers(6, 15))
            base = inst.path_edges(nodes)
            boundary = [0, nodes - 1]
        from .energies import graph_dirichlet

        pinned = graph_dirichlet(nodes, base, boundary)
        values = rng.uniform(-1.0, 1.0, size=len(boundary))
        energy = QuadraticEnergy(pinned.a, pinned.coupling @ values)
        n = energy.n
        big = OrderInterval(np.full(n, -UNBOUNDED), np.full(n, UNBOUNDED))
        u_harm = solve_psor(energy, big, tol=1e-10).u
        obstacle = u_harm + 0.3 * rng.uniform(0.0, 1.0, size=n) - 0.1
        lower = OrderInterval(obstacle, np.full(n, UNBOUNDED))
        u_obs = solve_psor(energy, lower, tol=1e-10).u
        worst = max(worst, float(np.max(u_harm - u_obs)))
    return [_row("comparison_principle", n_instances, worst, 1e-8)]


def check_hopf_lax(seed: int, n_instances: int = 40) -> list:
    rng = _rng(seed, "hopf_lax")
    worst_triple = worst_le = worst_tmono = worst_psimono = 0.0
    worst_lip = worst_ccdef = 0.0
    for _ in range(n_instances):
        n = int(rng.integers(3, 31))
        space = inst.random_planar_metric(rng, n)
        psi = rng.uniform(-0.5, 0.5, size=n)
        psi_c = c_transform(space, psi)
        worst_triple = max(worst_triple, float(np.max(np.abs(
            c_transform(space, c_transform(space, psi_c)) - psi_c))))
        t1, t2 = sorted(rng.uniform(0.05, 1.5, size=2))
        q1, q2 = hopf_lax(space, psi, t1), hopf_lax(space, psi, t2)
        worst_le = max(worst_le, float(np.max(q1 - psi)))
        worst_tmono = max(worst_tmono, float(np.max(q2 - q1)))
        other = psi + np.abs(rng.normal(size=n))
        worst_psimono = max(worst_psimono, float(np.max(
            hopf_lax(space, psi, t1) - hopf_lax(space, other, t1))))
        phi = inst.random_c_concave(rng, space, scale=0.3)
        phicc = c_transform(space, c_transform(space, phi))
        worst_ccdef = max(worst_ccdef, float(np.max(np.abs(phicc - phi))),
                          float(np.max(phi - phicc)))
        off = ~np.eye(n, dtype=bool)
        for t in (0.25, 0.5, 0.75):
            q = hopf_lax(space, -phi, t)
            lip_q = float(np.max(np.abs(q[:, None] - q[None, :])[off] / space.D[off]))
            bound = 2.0 * math.sqrt(float(np.max(np.abs(phi))) / t)
            worst_lip = max(worst_lip, lip_q - bound)
    return [
        _row("hopflax_triple_transform", n_instances, worst_triple, 1e-12),
        _row("hopflax_below_input", n_instances, worst_le, 1e-12),
        _row("hopflax_time_monotone", n_instances, worst_tmono, 1e-12),
        _row("hopflax_input_monotone", n_instances, worst_psimono, 1e-12),
        _row("hopflax_cc_idempotent", n_instances, worst_ccdef, 1e-12),
        _row("hopflax_lipschitz_bound", 3 * n_instances, worst_lip, 1e-9),
    ]


def check_intpot(seed: int, n_instances: int = 30) -> list:
    rng = _rng(seed, "intpot")
    worst = 0.0
    ts = np.arange(1, 10) / 10.0
    for _ in range(n_instances):
        n = int(rng.integers(3, 11))
        space = inst.random_planar_metric(rng, n)
        phi = inst.random_c_concave(rng, space, scale=0.4)
        for t in ts:
            _, slack = interpolation_duality_check(space, phi, float(t))
            worst = max(worst, -slack)
    # Two-point worked instance: slack must vanish exactly at both points.
    two = inst.path_space(2)
    phi2 = np.array([0.0, -0.3])
    slack2 = (hopf_lax(two, -phi2, 0.5)
              + hopf_lax(two, -c_transform(two, phi2), 0.5))
    return [
        _row("intpot_positivity", n_instances * ts.size, worst, 1e-12),
        _row("intpot_two_point_exact", 1, float(np.max(np.abs(slack2))), 0.0),
    ]


def _cutoff_cases(rng: np.random.Generator) -> list:
    cases = [
        (inst.path_space(5), [2], [1, 2, 3], "path5"),
        (inst.path_space(11), [5], list(range(2, 9)), "path11"),
        (inst.grid_space(15, 15),
         [i * 15 + j for i in range(6, 9) for j in range(6, 9)],
         [i * 15 + j for i in range(3, 12) for j in range(3, 12)],
         "grid15"),
    ]
    side = int(rng.integers(7, 10))
    center = side // 2
    cases.append((
        inst.grid_space(side, side),
        [center * side + center],
        [i * side + j for i in range(1, side - 1) for j in range(1, side - 1)],
        "random_grid",
    ))
    return cases


def check_cutoff(seed: int, paper_radius: bool = False) -> list:
    rng = _rng(seed, "cutoff")
    cases = _cutoff_cases(rng)
    worst_order = 0.0
    worst_pins = worst_slack = worst_bound = 0.0
    n_built = 0
    for space, core, region, _name in cases:
        try:
            phi, psi, _ = cutoff_obstacles(space, core, region, paper_radius=paper_radius)
        except ObstacleOrderError as err:
            worst_order = max(worst_order, float(err.violation))
            continue
        worst_order = max(worst_order, float(np.max(phi - psi)))
        energy = space.dirichlet_energy
        box = OrderInterval(phi, psi)
        sol = solve_psor(energy, box, tol=1e-9)
        if not sol.converged:
            worst_slack = math.inf
            continue
        n_built += 1
        cert = ls_certificate(energy, box, sol, 1e-8)
        worst_slack = max(worst_slack, -cert.lower_slack_min, -cert.upper_slack_min)
        out = sorted(set(range(space.n)) - set(region))
        worst_pins = max(
            worst_pins,
            float(np.max(np.abs(sol.u[core] - 1.0))),
            float(np.max(np.abs(sol.u[out]))),
        )
        lap_u = float(np.max(np.abs(-energy.gradient(sol.u))))
        lap_phi = -energy.gradient(phi)
        lap_psi = -energy.gradient(psi)
        obstacle_bound = max(
            float(np.max(np.abs(np.minimum(lap_phi, 0.0)))),
            float(np.max(np.abs(np.maximum(lap_psi, 0.0)))),
        )
        worst_bound = max(worst_bound, lap_u - obstacle_bound)
    rows = [_row("cutoff_phi_le_psi", len(cases), worst_order, 0.0)]
    if n_built:
        rows += [
            _row("cutoff_pins_exact", n_built, worst_pins, 0.0),
            _row("cutoff_certificate", n_built, worst_slack, 1e-8),
            _row("cutoff_laplacian_bound", n_built, worst_bound, 1e-8),
        ]
    else:
        rows += [
            _row("cutoff_pins_exact", 0, math.inf, 0.0),
            _row("cutoff_certificate", 0, math.inf, 1e-8),
            _row("cutoff_laplacian_bound", 0, math.inf, 1e-8),
        ]
    return rows


def check_kantorovich(seed: int, n_potentials: int = 4) -> list:
    rng = _rng(seed, "kantorovich")
    space = inst.path_space(21, weight=1.0 / 20.0)
    worst_gap = worst_slack = worst_clamp = worst_cc = 0.0
    reported_cc = 0.0
    worst_lap = 0.0
    n_runs = 0
    for _ in range(n_potentials):
        phi = inst.random_c_concave(rng, space, scale=0.2)
        for t in (0.25, 0.5, 0.75):
            n_runs += 1
            phi_c = c_transform(space, phi)
            lo = -hopf_lax(space, -phi, t)
            hi = hopf_lax(space, -phi_c, 1.0 - t)
            worst_gap = max(worst_gap, float(np.max(lo - hi)))
            box = OrderInterval(np.minimum(lo, hi), hi)
            energy = space.dirichlet_energy
            sol = solve_psor(energy, box, tol=1e-9)
            if not sol.converged:
                worst_slack = math.inf
                continue
            cert = ls_certificate(energy, box, sol, 1e-8)
            worst_slack = max(worst_slack, -cert.lower_slack_min, -cert.upper_slack_min)
            coincidence = np.flatnonzero(np.abs(hi - lo) <= 1e-9)
            if coincidence.size:
                worst_clamp = max(worst_clamp, float(np.max(
                    np.abs(sol.u[coincidence] - lo[coincidence]))))
            from .metric import PotentialPair

            pair = PotentialPair(phi=phi, phi_c=phi_c, t=t,
                                 lo=np.minimum(lo, hi), hi=hi,
                                 coincidence_set=coincidence)
            report = coincidence_cc_report(space, pair, sol.u)
            worst_cc = max(worst_cc, report["derived_minus_t_eta"],
                           report["derived_one_minus_t_eta"])
            reported_cc = max(reported_cc, report["reported_t_eta"],
                              report["reported_minus_one_minus_t_eta"])
            worst_lap = max(worst_lap, float(np.max(np.abs(-energy.gradient(sol.u)))))
    return [
        _row("kantorovich_lo_le_hi", n_runs, worst_gap, 1e-12),
        _row("kantorovich_certificate", n_runs, worst_slack, 1e-8),
        _row("kantorovich_clamping", n_runs, worst_clamp, 1e-9),
        _row("kantorovich_cc_derived", n_runs, worst_cc, 1e-8),
        _row("kantorovich_cc_reported", n_runs, reported_cc, math.inf),
        _row("kantorovich_laplacian_norm", n_runs, worst_lap, math.inf),
    ]


def check_maximum_principle(seed: int, n_instances: int = 20) -> list:
    rng = _rng(seed, "maximum_principle")
    worst = 0.0
    for _ in range(n_instances):
        energy, values = inst.random_grid_dirichlet(rng)
        interior = harmonic_extension(energy, values)
        _, overshoot = maximum_principle_check(energy, values, interior)
        worst = max(worst, overshoot)
    return [_row("maximum_principle", n_instances, worst, 1e-9)]


#: Registered checks in canonical order; cutoff takes the radius flag.
CHECKS = {
    "lattice": check_lattice_identities,
    "zmatrix": check_zmatrix_equivalence,
    "t_monotonicity": check_t_monotonicity,
    "scalar_sub2": check_scalar_sub2,
    "oracle": check_oracle_equivalence,
    "ls_quadratic": check_ls_quadratic,
    "ls_fractional": check_ls_fractional,
    "psor_monotone": check_psor_monotone,
    "comparison": check_comparison_principle,
    "hopf_lax": check_hopf_lax,
    "intpot": check_intpot,
    "cutoff": check_cutoff,
    "kantorovich": check_kantorovich,
    "maximum_principle": check_maximum_principle,
}


def run_suite(seed: int = 0, checks=None, paper_radius: bool = False):
    """Run the selected checks (all by default); returns (rows, all_pass).

    Rows come back sorted by check name.  Unknown check selections raise
    KeyError so the CLI can map them to a config error.
    """
    selected = list(CHECKS) if checks is None else list(checks)
    rows = []
    for name in selected:
        if name not in CHECKS:
            raise KeyError(f"unknown check {name!r}")
        fn = CHECKS[name]
        try:
            if name == "cutoff":
                rows.extend(fn(seed, paper_radius=paper_radius))
            else:
                rows.extend(fn(seed))
        except ObslatError as err:
            rows.append(_row(f"{name}_error:{type(err).__name__}", 0, math.inf, 0.0))
    rows.sort(key=lambda r: r["check_name"])
    return rows, all(r["pass"] for r in rows)
