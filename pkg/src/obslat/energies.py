"""Convex submodular energies on R^n.

Two families are provided:

* :class:`QuadraticEnergy` -- E(u) = 1/2 <Au,u> + <b,u> for a symmetric PSD
  matrix A.  The energy is submodular exactly when A is a Z-matrix
  (nonpositive off-diagonal entries); graph Laplacians are the canonical
  source.
* :class:`KernelEnergy` -- E(u) = (1/p) [ sum_{i<j} w_ij |u_i-u_j|^p
  + sum_i d_i |u_i|^p ], the discrete analogue of a (fractional) Gagliardo
  p-energy with a truncated zero-extension collar carried by the d_i.

Both expose ``value`` and ``gradient``; the module-level checks
(:func:`submodularity_check`, :func:`t_monotonicity_check`,
:func:`z_matrix_violation`, :func:`scalar_submodularity_inequality`)
turn the structural assumptions into testable verdicts.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import ConstructionError, DimensionMismatch, NondifferentiableError, PreconditionError
from .lattice import as_vector

#: Off-diagonal entries above this threshold count as Z-matrix violations.
Z_TOL = 1e-12

#: Allowed asymmetry |A_ij - A_ji| in stored matrices.
SYMMETRY_TOL = 1e-12


class CheckResult(NamedTuple):
    """Outcome of a pass/fail check together with the measured quantity."""

    passed: bool
    value: float


def _pivoted_cholesky_psd(a: np.ndarray, pivot_tol: float = 1e-10) -> bool:
    """Certify positive semidefiniteness by pivoted Cholesky elimination.

    Runs a right-looking factorization with diagonal pivoting.  A pivot below
    ``-pivot_tol * scale`` rejects.  Once all remaining pivots are at noise
    level, the whole trailing block must be at noise level too (a tiny
    diagonal with large off-diagonal entries is indefinite).
    """
    s = np.array(a, dtype=float, copy=True)
    n = s.shape[0]
    scale = max(1.0, float(np.max(np.abs(np.diag(s)))) if n else 1.0)
    tol = pivot_tol * scale
    order = np.arange(n)
    for k in range(n):
        d = np.diag(s)[k:]
        p = k + int(np.argmax(d))
        if p != k:
            s[[k, p], :] = s[[p, k], :]
            s[:, [k, p]] = s[:, [p, k]]
            order[[k, p]] = order[[p, k]]
        pivot = s[k, k]
        if pivot < -tol:
            return False
        if pivot <= tol:
            return bool(np.max(np.abs(s[k:, k:])) <= tol)
        s[k + 1:, k + 1:] -= np.outer(s[k + 1:, k], s[k, k + 1:]) / pivot
    return True


class QuadraticEnergy:
    """E(u) = 1/2 <Au,u> + <b,u> with symmetric PSD A stored sparse.

    ``submodular`` is True exactly when all off-diagonal entries of A are
    nonpositive (up to ``Z_TOL``).  The discrete Laplacian associated with
    the energy is ``laplacian(u) = -(Au + b) = -gradient(u)``.
    """

    def __init__(self, a, b=None, *, check_psd: bool = True):
        a = sp.csr_matrix(a, dtype=float)
        if a.shape[0] != a.shape[1]:
            raise ConstructionError(f"matrix must be square, got {a.shape}")
        self.n = a.shape[0]
        asym = abs(a - a.T)
        if asym.nnz and asym.max() > SYMMETRY_TOL:
            raise ConstructionError(
                f"matrix asymmetry {asym.max():.3e} exceeds {SYMMETRY_TOL}"
            )
        if not np.all(np.isfinite(a.data)):
            raise ConstructionError("matrix entries must be finite")
        if check_psd and not _pivoted_cholesky_psd(a.toarray()):
            raise ConstructionError("matrix failed the positive-semidefiniteness check")
        offdiag = a - sp.diags(a.diagonal())
        self.submodular = bool(offdiag.nnz == 0 or offdiag.data.max() <= Z_TOL)
        if b is None:
            b = np.zeros(self.n)
        b = as_vector(b, "b")
        if b.shape[0] != self.n:
            raise DimensionMismatch(f"linear term length {b.shape[0]} != n {self.n}")
        b.setflags(write=False)
        self.a = a
        self.b = b
        # Set by graph_dirichlet: coupling to eliminated boundary nodes.
        self.coupling: sp.csr_matrix | None = None
        self.free_nodes: np.ndarray | None = None
        self.dirichlet_nodes: np.ndarray | None = None

    @classmethod
    def from_triplets(cls, n: int, triplets, b=None, *, check_psd: bool = True):
        """Build from (i, j, value) entries; duplicate positions are summed."""
        rows, cols, vals = [], [], []
        for i, j, v in triplets:
            i, j = int(i), int(j)
            if not (0 <= i < n and 0 <= j < n):
                raise ConstructionError(f"triplet index ({i},{j}) out of range for n={n}")
            rows.append(i)
            cols.append(j)
            vals.append(float(v))
        a = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        return cls(a, b, check_psd=check_psd)

    def value(self, u) -> float:
        u = as_vector(u, "u")
        if u.shape[0] != self.n:
            raise DimensionMismatch(f"vector length {u.shape[0]} != n {self.n}")
        return float(0.5 * (u @ (self.a @ u)) + self.b @ u)

    def gradient(self, u) -> np.ndarray:
        u = as_vector(u, "u")
        if u.shape[0] != self.n:
            raise DimensionMismatch(f"vector length {u.shape[0]} != n {self.n}")
        return self.a @ u + self.b

    def laplacian(self, u) -> np.ndarray:
        """Discrete Laplacian -(Au + b)."""
        return -self.gradient(u)

    def diagonal(self) -> np.ndarray:
        return self.a.diagonal()

    def to_triplet_text(self) -> str:
        """Serialize as ``n nnz`` header plus one ``i j value`` line per entry.

        Symmetric off-diagonal entries are both stored.
        """
        coo = self.a.tocoo()
        lines = [f"{self.n} {coo.nnz}"]
        order = np.lexsort((coo.col, coo.row))
        for k in order:
            lines.append(f"{coo.row[k]} {coo.col[k]} {float(coo.data[k])!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_triplet_text(cls, text: str, b=None, *, check_psd: bool = True):
        rows = [ln for ln in text.splitlines() if ln.strip()]
        if not rows:
            raise ConstructionError("empty triplet text")
        header = rows[0].split()
        if len(header) != 2:
            raise ConstructionError(f"bad triplet header {rows[0]!r}, expected 'n nnz'")
        n, nnz = int(header[0]), int(header[1])
        if len(rows) - 1 != nnz:
            raise ConstructionError(f"header promises {nnz} entries, found {len(rows) - 1}")
        triplets = []
        for ln in rows[1:]:
            parts = ln.split()
            if len(parts) != 3:
                raise ConstructionError(f"bad triplet line {ln!r}")
            triplets.append((int(parts[0]), int(parts[1]), float(parts[2])))
        return cls.from_triplets(n, triplets, b, check_psd=check_psd)


def graph_dirichlet(nodes: int, edges, dirichlet_set=()) -> QuadraticEnergy:
    """Dirichlet energy of a weighted graph with zero values pinned on a node set.

    Returns the quadratic energy of the graph Laplacian restricted to the free
    nodes (rows and columns of the pinned nodes deleted).  The coupling block
    between free and pinned nodes is kept on the result (``coupling``) so that
    harmonic extensions with nonzero boundary data can be formed later.
    """
    dirichlet = sorted(set(int(i) for i in dirichlet_set))
    for i in dirichlet:
        if not 0 <= i < nodes:
            raise ConstructionError(f"dirichlet node {i} out of range")
    rows, cols, vals = [], [], []
    for i, j, w in edges:
        i, j, w = int(i), int(j), float(w)
        if i == j:
            raise ConstructionError(f"self-loop at node {i}")
        if not (0 <= i < nodes and 0 <= j < nodes):
            raise ConstructionError(f"edge ({i},{j}) out of range for {nodes} nodes")
        if w <= 0:
            raise ConstructionError(f"edge ({i},{j}) has nonpositive weight {w}")
        rows += [i, j, i, j]
        cols += [i, j, j, i]
        vals += [w, w, -w, -w]
    lap = sp.coo_matrix((vals, (rows, cols)), shape=(nodes, nodes)).tocsr()
    free = np.array([i for i in range(nodes) if i not in set(dirichlet)], dtype=int)
    if free.size == 0:
        raise ConstructionError("dirichlet_set covers every node; nothing to solve for")
    energy = QuadraticEnergy(lap[free][:, free])
    if dirichlet:
        energy.coupling = sp.csr_matrix(lap[free][:, np.array(dirichlet, dtype=int)])
    energy.free_nodes = free
    energy.dirichlet_nodes = np.array(dirichlet, dtype=int)
    return energy


class KernelEnergy:
    """Pairwise p-energy with exterior collar weights.

    E(u) = (1/p) [ sum_pairs w_ij |u_i - u_j|^p + sum_i d_i |u_i|^p ],
    convex and submodular for p > 1 since |.|^p is convex.  For p < 2 the
    gradient does not exist where a pair difference (or an entry with
    d_i > 0) is exactly zero; such calls raise NondifferentiableError.
    """

    def __init__(self, n: int, pairs, exterior, p: float):
        if p <= 1:
            raise ConstructionError(f"p must exceed 1, got {p}")
        self.n = int(n)
        if self.n < 1:
            raise ConstructionError("n must be >= 1")
        i_idx, j_idx, w = [], [], []
        for i, j, wij in pairs:
            i, j, wij = int(i), int(j), float(wij)
            if not 0 <= i < j < self.n:
                raise ConstructionError(f"pair ({i},{j}) must satisfy 0 <= i < j < n")
            if wij <= 0:
                raise ConstructionError(f"pair ({i},{j}) has nonpositive weight {wij}")
            i_idx.append(i)
            j_idx.append(j)
            w.append(wij)
        d = np.zeros(self.n)
        for i, di in exterior:
            i, di = int(i), float(di)
            if not 0 <= i < self.n:
                raise ConstructionError(f"exterior index {i} out of range")
            if di < 0:
                raise ConstructionError(f"exterior weight d_{i} = {di} must be >= 0")
            d[i] += di
        self.i = np.array(i_idx, dtype=int)
        self.j = np.array(j_idx, dtype=int)
        self.w = np.array(w, dtype=float)
        self.d = d
        self.p = float(p)
        for arr in (self.i, self.j, self.w, self.d):
            arr.setflags(write=False)

    def _check_dim(self, u: np.ndarray) -> None:
        if u.shape[0] != self.n:
            raise DimensionMismatch(f"vector length {u.shape[0]} != n {self.n}")

    def value(self, u) -> float:
        u = as_vector(u, "u")
        self._check_dim(u)
        diffs = u[self.i] - u[self.j]
        total = self.w @ np.abs(diffs) ** self.p + self.d @ np.abs(u) ** self.p
        return float(total / self.p)

    def gradient(self, u) -> np.ndarray:
        u = as_vector(u, "u")
        self._check_dim(u)
        diffs = u[self.i] - u[self.j]
        if self.p < 2:
            if np.any(diffs == 0.0) or np.any((self.d > 0) & (u == 0.0)):
                raise NondifferentiableError(
                    f"p = {self.p} < 2 gradient undefined at a tied difference"
                )
        t = self.w * np.abs(diffs) ** (self.p - 2) * diffs
        g = np.bincount(self.i, weights=t, minlength=self.n)
        g -= np.bincount(self.j, weights=t, minlength=self.n)
        g += self.d * np.abs(u) ** (self.p - 2) * u
        return g

    def laplacian(self, u) -> np.ndarray:
        return -self.gradient(u)

    def induced_quadratic(self) -> QuadraticEnergy:
        """For p = 2, the matrix A with E(u) = 1/2 <Au,u> exactly.

        A is the weighted graph Laplacian of the pairs plus diag(d):
        A_ij = -w_ij for a stored pair, A_ii = sum_j w_ij + d_i.
        """
        if self.p != 2:
            raise PreconditionError("induced quadratic form requires p = 2")
        triplets = [(i, i, di) for i, di in enumerate(self.d) if di != 0.0]
        for i, j, w in zip(self.i, self.j, self.w):
            triplets += [(i, i, w), (j, j, w), (i, j, -w), (j, i, -w)]
        return QuadraticEnergy.from_triplets(self.n, triplets)

    def to_json_dict(self) -> dict:
        return {
            "kind": "kernel",
            "n": self.n,
            "p": self.p,
            "pairs": [[int(i), int(j), float(w)] for i, j, w in zip(self.i, self.j, self.w)],
            "exterior": [[int(i), float(d)] for i, d in enumerate(self.d) if d != 0.0],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "KernelEnergy":
        return cls(data["n"], data["pairs"], data.get("exterior", []), data["p"])


def fractional_kernel_1d(n: int, h: float, s: float, p: float, collar: int) -> KernelEnergy:
    """1-D discrete fractional p-kernel on n interior grid points.

    Interior points sit at spacing h; interacting pairs carry the weight
    w_ij = h^2 * (h |i-j|)^(-(1+p*s)).  The zero extension outside the
    interior is truncated to ``collar`` grid points on each side, whose
    interactions accumulate into the exterior weights d_i.  The neglected
    tail per endpoint is sum_{m > collar} (h m')^(-(1+p*s)) over the
    remaining exterior points.
    """
    if int(n) < 1:
        raise ConstructionError("n must be >= 1")
    if h <= 0:
        raise ConstructionError(f"grid spacing h = {h} must be positive")
    if not 0 < s < 1:
        raise ConstructionError(f"exponent s = {s} must lie in (0,1)")
    if p <= 1:
        raise ConstructionError(f"p = {p} must exceed 1")
    if int(collar) < 1:
        raise ConstructionError(f"collar = {collar} must be >= 1")
    n, collar = int(n), int(collar)
    a = 1.0 + p * s
    pairs = [
        (i, j, h * h * (h * (j - i)) ** (-a))
        for i in range(n)
        for j in range(i + 1, n)
    ]
    exterior = []
    for i in range(n):
        k = i + 1  # 1-indexed interior position
        left = sum((h * (k - 1 + m)) ** (-a) for m in range(1, collar + 1))
        right = sum((h * (n - k + m)) ** (-a) for m in range(1, collar + 1))
        exterior.append((i, h * h * (left + right)))
    return KernelEnergy(n, pairs, exterior, p)


def _value_fn(energy):
    return energy.value if hasattr(energy, "value") else energy


def _gradient_fn(energy):
    return energy.gradient if hasattr(energy, "gradient") else energy


def submodularity_check(energy, u, v, tol: float = 0.0) -> CheckResult:
    """delta = E(u∧v) + E(u∨v) - E(u) - E(v); passes iff delta <= tol.

    ``energy`` may be an energy object or a plain callable u -> E(u), which
    allows probing quadratic forms that would fail PSD certification.
    """
    u, v = as_vector(u, "u"), as_vector(v, "v")
    if u.shape[0] != v.shape[0]:
        raise DimensionMismatch("u and v must have equal length")
    f = _value_fn(energy)
    delta = f(np.minimum(u, v)) + f(np.maximum(u, v)) - f(u) - f(v)
    return CheckResult(bool(delta <= tol), float(delta))


def t_monotonicity_check(energy, u, v, tol: float = 0.0) -> CheckResult:
    """mu = <grad E(u) - grad E(v), (u-v) ∨ 0>; passes iff mu >= -tol."""
    u, v = as_vector(u, "u"), as_vector(v, "v")
    if u.shape[0] != v.shape[0]:
        raise DimensionMismatch("u and v must have equal length")
    g = _gradient_fn(energy)
    mu = float((np.asarray(g(u)) - np.asarray(g(v))) @ np.maximum(u - v, 0.0))
    return CheckResult(bool(mu >= -tol), mu)


class ZMatrixViolation(NamedTuple):
    """Positive off-diagonal entry with its coordinate-pair witness."""

    i: int
    j: int
    u: np.ndarray
    v: np.ndarray
    entry: float


def z_matrix_violation(a) -> ZMatrixViolation | None:
    """Largest positive off-diagonal entry of a symmetric matrix, if any.

    Returns the witness pair u = e_i, v = e_j for which the submodularity
    defect of the quadratic form equals the entry exactly, or None when all
    off-diagonal entries are <= Z_TOL.
    """
    if isinstance(a, QuadraticEnergy):
        a = a.a
    dense = a.toarray() if sp.issparse(a) else np.asarray(a, dtype=float)
    n = dense.shape[0]
    off = dense.copy()
    np.fill_diagonal(off, -np.inf)
    flat = int(np.argmax(off))
    i, j = divmod(flat, n)
    if off[i, j] <= Z_TOL:
        return None
    u = np.zeros(n)
    v = np.zeros(n)
    u[i] = 1.0
    v[j] = 1.0
    return ZMatrixViolation(int(i), int(j), u, v, float(dense[i, j]))


def scalar_submodularity_inequality(p: float, x1: float, x2: float, y1: float, y2: float) -> CheckResult:
    """Convexity inequality for f(x) = |x|^p on a scalar quadruple.

    Checks f(x1-x2) + f(y1-y2) >= f(x1∨y1 - x2∨y2) + f(x1∧y1 - x2∧y2)
    up to 1e-12; this is the pointwise mechanism behind kernel-energy
    submodularity.
    """
    if p < 1:
        raise PreconditionError(f"p = {p} must be >= 1")

    def f(x):
        return abs(x) ** p

    lhs = f(x1 - x2) + f(y1 - y2)
    rhs = f(max(x1, y1) - max(x2, y2)) + f(min(x1, y1) - min(x2, y2))
    margin = lhs - rhs
    return CheckResult(bool(margin >= -1e-12), float(margin))
