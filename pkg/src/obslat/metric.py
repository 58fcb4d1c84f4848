"""Finite metric spaces, the Hopf-Lax operator, and obstacle constructions.

The Hopf-Lax operator on a finite metric space (X, d),

    (Q_t psi)_x = min_y  d(x, y)^2 / (2 t) + psi_y,

generates the c-transform (psi^c = Q_1(-psi)) and c-concave functions
(phi = phi^cc).  Two constructions feed these into the double obstacle
solver on graph-backed spaces:

* :func:`build_cutoff` -- a function that is exactly 1 on a core set, exactly
  0 outside a region, obtained by minimizing the graph Dirichlet energy
  between two distance-profile obstacles; its discrete Laplacian is bounded
  by the obstacle Laplacians through the Lewy-Stampacchia certificate.
* :func:`kantorovich_regularize` -- given a c-concave potential phi and an
  interpolation time t, minimizes the Dirichlet energy between
  -Q_t(-phi) and Q_{1-t}(-phi^c); the interval is nonempty on any metric
  space, and on the coincidence set the minimizer is pinned to both bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .certificates import ls_certificate
from .energies import CheckResult, QuadraticEnergy, graph_dirichlet
from .errors import (
    CertificateError,
    ConstructionError,
    DimensionMismatch,
    ObstacleOrderError,
    PreconditionError,
)
from .lattice import OrderInterval, as_vector
from .solvers import solve_psor

#: Entries of distance matrices may violate the triangle inequality by at
#: most this relative amount (accumulated rounding in shortest paths).
TRIANGLE_RTOL = 1e-10

#: Exhaustive triangle check up to this size; deterministic sampling above.
TRIANGLE_EXHAUSTIVE_N = 200

#: |hi - lo| below this counts as coincidence of the potential bounds.
COINCIDENCE_TOL = 1e-9


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Distance matrix with the metric axioms checked at construction."""

    D: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.D, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ConstructionError(f"distance matrix must be square, got {d.shape}")
        n = d.shape[0]
        if not np.all(np.isfinite(d)):
            raise ConstructionError("distances must be finite")
        if np.max(np.abs(d - d.T)) > 1e-12:
            raise ConstructionError("distance matrix is not symmetric")
        d = 0.5 * (d + d.T)
        if np.any(np.diag(d) != 0.0):
            raise ConstructionError("diagonal distances must be exactly zero")
        off = ~np.eye(n, dtype=bool)
        if n > 1 and np.min(d[off]) <= 0.0:
            raise ConstructionError("off-diagonal distances must be positive")
        tol = TRIANGLE_RTOL * (1.0 + float(np.max(d)))
        if n <= TRIANGLE_EXHAUSTIVE_N:
            mids = range(n)
        else:
            mids = np.unique(np.linspace(0, n - 1, TRIANGLE_EXHAUSTIVE_N, dtype=int))
        for k in mids:
            if np.max(d - (d[:, [k]] + d[[k], :])) > tol:
                raise ConstructionError(f"triangle inequality fails through point {k}")
        d.setflags(write=False)
        object.__setattr__(self, "D", d)

    @property
    def n(self) -> int:
        return self.D.shape[0]

    @classmethod
    def from_points(cls, points) -> "FiniteMetricSpace":
        """Euclidean metric on a point cloud (rows are points)."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2:
            raise ConstructionError("points must be a 2-D array")
        diff = pts[:, None, :] - pts[None, :, :]
        return cls(np.sqrt(np.sum(diff * diff, axis=2)))

    def to_json_dict(self) -> dict:
        tri = [float(self.D[i, j]) for i in range(1, self.n) for j in range(i)]
        return {"points": self.n, "distances": tri}


@dataclass(frozen=True)
class GraphSpace(FiniteMetricSpace):
    """Shortest-path metric of a weighted graph, with its Dirichlet energy.

    The graph both induces the metric (so the two constructions see
    consistent geometry) and supplies the quadratic energy minimized between
    the obstacles.
    """

    edges: tuple = field(default=())

    @classmethod
    def from_graph(cls, nodes: int, edges) -> "GraphSpace":
        clean = []
        rows, cols, vals = [], [], []
        for i, j, w in edges:
            i, j, w = int(i), int(j), float(w)
            if i == j:
                raise ConstructionError(f"self-loop at node {i}")
            if not (0 <= i < nodes and 0 <= j < nodes):
                raise ConstructionError(f"edge ({i},{j}) out of range for {nodes} nodes")
            if w <= 0:
                raise ConstructionError(f"edge ({i},{j}) has nonpositive weight {w}")
            clean.append((i, j, w))
            rows += [i, j]
            cols += [j, i]
            vals += [w, w]
        adj = sp.coo_matrix((vals, (rows, cols)), shape=(nodes, nodes)).tocsr()
        d = dijkstra(adj, directed=False)
        if not np.all(np.isfinite(d)):
            raise ConstructionError("graph is not connected; metric undefined")
        return cls(D=d, edges=tuple(clean))

    @cached_property
    def dirichlet_energy(self) -> QuadraticEnergy:
        """Laplacian energy of the full graph (no pinned nodes)."""
        return graph_dirichlet(self.n, self.edges)

    def to_json_dict(self) -> dict:
        return {
            "graph": {
                "nodes": self.n,
                "edges": [[int(i), int(j), float(w)] for i, j, w in self.edges],
            }
        }


def metric_space_from_json_dict(data: dict):
    """Deserialize either encoding: explicit distances or a weighted graph."""
    if "graph" in data:
        g = data["graph"]
        return GraphSpace.from_graph(int(g["nodes"]), g["edges"])
    n = int(data["points"])
    tri = data["distances"]
    if len(tri) != n * (n - 1) // 2:
        raise ConstructionError(
            f"lower triangle of an n={n} metric needs {n * (n - 1) // 2} entries, got {len(tri)}"
        )
    d = np.zeros((n, n))
    k = 0
    for i in range(1, n):
        for j in range(i):
            d[i, j] = d[j, i] = float(tri[k])
            k += 1
    return FiniteMetricSpace(d)


def hopf_lax(space: FiniteMetricSpace, psi, t: float) -> np.ndarray:
    """(Q_t psi)_x = min_y d(x,y)^2/(2t) + psi_y.  Requires t > 0."""
    if t <= 0:
        raise PreconditionError(f"Hopf-Lax time t = {t} must be positive")
    psi = as_vector(psi, "psi")
    if psi.shape[0] != space.n:
        raise DimensionMismatch(f"psi length {psi.shape[0]} != {space.n} points")
    return np.min(space.D ** 2 / (2.0 * t) + psi[None, :], axis=1)


def c_transform(space: FiniteMetricSpace, psi) -> np.ndarray:
    """psi^c = Q_1(-psi)."""
    return hopf_lax(space, -as_vector(psi, "psi"), 1.0)


def is_c_concave(space: FiniteMetricSpace, phi, tol: float = 1e-9) -> CheckResult:
    """phi is c-concave iff phi^cc = phi (phi^cc >= phi always holds)."""
    phi = as_vector(phi, "phi")
    defect = float(np.max(np.abs(c_transform(space, c_transform(space, phi)) - phi)))
    return CheckResult(defect <= tol, defect)


def _index_set(indices, n: int, name: str) -> list[int]:
    out = sorted(set(int(i) for i in indices))
    for i in out:
        if not 0 <= i < n:
            raise ConstructionError(f"{name} index {i} out of range")
    return out


def cutoff_obstacles(space: FiniteMetricSpace, core, region,
                     paper_radius: bool = False):
    """Distance-profile obstacles for the cut-off construction.

    With r^2 = D0^2/4, D0 the distance from the core to the complement of the
    region, the obstacles

        phi = 1 - min(1, d(., core)^2 / (2 r^2)),
        psi = min(1, d(., X \\ region)^2 / (2 r^2))

    satisfy phi <= psi on every metric space, are both exactly 1 on the core
    and exactly 0 off the region.  ``paper_radius=True`` selects r^2 = D0^2/2
    instead, which admits phi > psi at metric midpoints (e.g. a 5-node path
    with core {2} and region {1,2,3}); the violation then raises
    ObstacleOrderError carrying the offending obstacles.

    Returns (phi, psi, r2).
    """
    n = space.n
    c_idx = _index_set(core, n, "core")
    o_idx = _index_set(region, n, "region")
    if not c_idx:
        raise ConstructionError("core set must be nonempty")
    if not set(c_idx) <= set(o_idx):
        raise ConstructionError("core must be contained in the region")
    out_idx = sorted(set(range(n)) - set(o_idx))
    if not out_idx:
        raise ConstructionError("region must have a nonempty complement")
    d_core = np.min(space.D[:, c_idx], axis=1)
    d_out = np.min(space.D[:, out_idx], axis=1)
    d0 = float(np.min(d_core[out_idx]))
    r2 = d0 * d0 / 2.0 if paper_radius else d0 * d0 / 4.0
    phi = 1.0 - np.minimum(1.0, d_core ** 2 / (2.0 * r2))
    psi = np.minimum(1.0, d_out ** 2 / (2.0 * r2))
    if np.any(phi > psi):
        raise ObstacleOrderError(
            "cut-off obstacles violate phi <= psi"
            + (" (expected with the alternative radius)" if paper_radius else ""),
            violation=float(np.max(phi - psi)),
            lo=phi,
            hi=psi,
        )
    return phi, psi, r2


def _require_graph_space(space) -> GraphSpace:
    if not isinstance(space, GraphSpace):
        raise PreconditionError(
            "this construction needs a graph-backed space (GraphSpace)"
        )
    return space


def _certified_solve(space: GraphSpace, box: OrderInterval, tol: float,
                     max_iter: int, relaxation: float, cert_tol: float | None):
    energy = space.dirichlet_energy
    sol = solve_psor(energy, box, tol=tol, max_iter=max_iter, omega=relaxation)
    if cert_tol is None:
        cert_tol = max(1e-8, 10.0 * tol)
    cert = ls_certificate(energy, box, sol, cert_tol)
    if not cert.passed:
        raise CertificateError(
            f"Lewy-Stampacchia certificate failed (min slacks "
            f"{cert.lower_slack_min:.3e}, {cert.upper_slack_min:.3e})"
        )
    return energy, sol, cert, cert_tol


def build_cutoff(space: GraphSpace, core, region, tol: float = 1e-9,
                 max_iter: int = 20000, relaxation: float = 1.5,
                 paper_radius: bool = False, cert_tol: float | None = None):
    """Cut-off function with certified Laplacian bound.

    Minimizes the graph Dirichlet energy over the obstacle interval from
    :func:`cutoff_obstacles`.  The result is exactly 1 on the core, exactly 0
    off the region (forced by the coinciding obstacles there), and its
    Laplacian max-norm is bounded by the obstacle Laplacians up to the
    certificate tolerance.  Returns (omega, certificate).
    """
    space = _require_graph_space(space)
    phi, psi, _ = cutoff_obstacles(space, core, region, paper_radius=paper_radius)
    box = OrderInterval(phi, psi)
    energy, sol, cert, cert_tol = _certified_solve(
        space, box, tol, max_iter, relaxation, cert_tol)
    omega = sol.u
    c_idx = _index_set(core, space.n, "core")
    out_idx = sorted(set(range(space.n)) - set(_index_set(region, space.n, "region")))
    if np.any(omega[c_idx] != 1.0) or np.any(omega[out_idx] != 0.0):
        raise CertificateError("cut-off pinning failed (expected exact 1 on core, 0 outside)")
    lap_phi = -energy.gradient(phi)
    lap_psi = -energy.gradient(psi)
    obstacle_bound = max(
        float(np.max(np.abs(np.minimum(lap_phi, 0.0)))),
        float(np.max(np.abs(np.maximum(lap_psi, 0.0)))),
    )
    lap_norm = float(np.max(np.abs(-energy.gradient(omega))))
    if lap_norm > obstacle_bound + cert_tol:
        raise CertificateError(
            f"Laplacian bound violated: {lap_norm:.6e} > {obstacle_bound:.6e} + {cert_tol:.1e}"
        )
    return omega, cert


@dataclass(frozen=True)
class PotentialPair:
    """c-concave potential with its c-transform and interpolation bounds.

    ``lo = -Q_t(-phi)`` and ``hi = Q_{1-t}(-phi^c)``; the coincidence set
    collects the indices where the two bounds agree to COINCIDENCE_TOL.
    """

    phi: np.ndarray
    phi_c: np.ndarray
    t: float
    lo: np.ndarray
    hi: np.ndarray
    coincidence_set: np.ndarray

    def __post_init__(self):
        if np.any(self.lo > self.hi):
            raise ObstacleOrderError(
                "potential bounds violate lo <= hi",
                violation=float(np.max(self.lo - self.hi)),
                lo=self.lo,
                hi=self.hi,
            )


def _potential_bounds(space: FiniteMetricSpace, phi: np.ndarray, t: float):
    phi_c = c_transform(space, phi)
    lo = -hopf_lax(space, -phi, t)
    hi = hopf_lax(space, -phi_c, 1.0 - t)
    gap = hi - lo
    scale = 1.0 + float(np.max(np.abs(lo)) + np.max(np.abs(hi)))
    if float(np.min(gap)) < -1e-12 * scale:
        raise ObstacleOrderError(
            "interpolation bounds crossed beyond rounding; metric invariant bug",
            violation=float(np.max(lo - hi)),
            lo=lo,
            hi=hi,
        )
    hi = np.maximum(hi, lo)  # absorb sub-1e-12 rounding
    return phi_c, lo, hi


def kantorovich_regularize(space: GraphSpace, phi, t: float, tol: float = 1e-9,
                           max_iter: int = 20000, relaxation: float = 1.5,
                           cc_regularize: bool = False, cc_tol: float = 1e-9,
                           cert_tol: float | None = None):
    """Regularized potential at interpolation time t in (0, 1).

    ``phi`` must be c-concave (checked; pass ``cc_regularize=True`` to replace
    it by its double c-transform instead of erroring).  The minimizer eta of
    the graph Dirichlet energy over [-Q_t(-phi), Q_{1-t}(-phi^c)] clamps to
    both bounds on their coincidence set, where -t*eta and (1-t)*eta restrict
    c-concave functions.  Returns (eta, PotentialPair, certificate).
    """
    space = _require_graph_space(space)
    if not 0.0 < t < 1.0:
        raise PreconditionError(f"interpolation time t = {t} must lie in (0, 1)")
    phi = as_vector(phi, "phi")
    if cc_regularize:
        phi = c_transform(space, c_transform(space, phi))
    else:
        ok, defect = is_c_concave(space, phi, cc_tol)
        if not ok:
            raise PreconditionError(
                f"phi is not c-concave (defect {defect:.3e}); "
                "pass cc_regularize=True to project it"
            )
    phi_c, lo, hi = _potential_bounds(space, phi, t)
    coincidence = np.flatnonzero(np.abs(hi - lo) <= COINCIDENCE_TOL)
    pair = PotentialPair(phi=phi, phi_c=phi_c, t=float(t), lo=lo, hi=hi,
                         coincidence_set=coincidence)
    box = OrderInterval(lo, hi)
    _, sol, cert, _ = _certified_solve(space, box, tol, max_iter, relaxation, cert_tol)
    eta = sol.u
    if coincidence.size and np.max(np.abs(eta[coincidence] - lo[coincidence])) > COINCIDENCE_TOL:
        raise CertificateError("minimizer fails to clamp on the coincidence set")
    return eta, pair, cert


def interpolation_duality_check(space: FiniteMetricSpace, phi, t: float,
                                tol: float = 1e-12) -> CheckResult:
    """Q_t(-phi) + Q_{1-t}(-phi^c) >= 0 everywhere, for c-concave phi.

    Holds on any metric space since d(y,z)^2 <= d(x,y)^2/t + d(x,z)^2/(1-t).
    Returns the minimum slack.
    """
    if not 0.0 < t < 1.0:
        raise PreconditionError(f"interpolation time t = {t} must lie in (0, 1)")
    phi = as_vector(phi, "phi")
    ok, defect = is_c_concave(space, phi, 1e-9)
    if not ok:
        raise PreconditionError(f"phi is not c-concave (defect {defect:.3e})")
    slack = hopf_lax(space, -phi, t) + hopf_lax(space, -c_transform(space, phi), 1.0 - t)
    m = float(np.min(slack))
    return CheckResult(m >= -tol, m)


def coincidence_cc_report(space: FiniteMetricSpace, pair: PotentialPair,
                          eta) -> dict:
    """c-concavity defects of the scaled minimizer on the coincidence set.

    ``derived_*`` entries measure the provable identities
    (-t eta)^cc = -t eta and ((1-t) eta)^cc = (1-t) eta on the coincidence
    set.  The ``reported_*`` entries measure the same identity with the
    opposite signs; they are informational only and not asserted anywhere.
    """
    eta = as_vector(eta, "eta")
    idx = pair.coincidence_set

    def defect(v: np.ndarray) -> float:
        if idx.size == 0:
            return 0.0
        vcc = c_transform(space, c_transform(space, v))
        return float(np.max(np.abs(vcc[idx] - v[idx])))

    t = pair.t
    return {
        "derived_minus_t_eta": defect(-t * eta),
        "derived_one_minus_t_eta": defect((1.0 - t) * eta),
        "reported_t_eta": defect(t * eta),
        "reported_minus_one_minus_t_eta": defect(-(1.0 - t) * eta),
        "coincidence_size": int(idx.size),
    }
