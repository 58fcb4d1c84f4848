"""Minimizers for convex energies over an order interval [lo, hi].

Three routes with very different trust profiles:

* :func:`solve_psor` -- projected SOR for quadratic Z-matrix energies; fast,
  monotone on M-matrices, the workhorse.
* :func:`solve_projected_gradient` -- projected gradient with Armijo
  backtracking for any differentiable energy (kernel energies need p >= 2).
* :func:`brute_force_active_set` -- enumeration of all activity patterns for
  n <= 12; slow and completely independent of the iterative solvers, used as
  the audit oracle.

All solvers report their first-order optimality through
:func:`kkt_residual`, and classify active sets with a fixed relative
tie-break so certificates are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energies import KernelEnergy, QuadraticEnergy
from .errors import PreconditionError, SolverError
from .lattice import OrderInterval, as_vector, clamp

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap

#: Relative half-width of the band in which an index counts as active.
ACTIVE_RTOL = 1e-9

#: Containment slack for precondition checks (relative to bound magnitude).
FEAS_RTOL = 1e-12

#: Multiplier sign tolerance in the brute-force KKT scan.
ORACLE_SIGN_TOL = 1e-10

#: Armijo line-search constants (initial step, shrink, decrease, floor).
ARMIJO_STEP0 = 1.0
ARMIJO_SHRINK = 0.5
ARMIJO_DECREASE = 1e-4
ARMIJO_FLOOR = 1e-14


@dataclass(frozen=True)
class Solution:
    """Minimizer with its gradient, active-set partition and KKT residual."""

    u: np.ndarray
    grad: np.ndarray
    active_lower: np.ndarray
    active_upper: np.ndarray
    free: np.ndarray
    kkt_residual: float
    iterations: int
    converged: bool

    def to_json_dict(self) -> dict:
        return {
            "u": self.u.tolist(),
            "grad": self.grad.tolist(),
            "active_lower": self.active_lower.tolist(),
            "active_upper": self.active_upper.tolist(),
            "free": self.free.tolist(),
            "kkt_residual": self.kkt_residual,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def _active_masks(u: np.ndarray, box: OrderInterval):
    at_lo = np.abs(u - box.lo) <= ACTIVE_RTOL * (1.0 + np.abs(box.lo))
    at_hi = np.abs(u - box.hi) <= ACTIVE_RTOL * (1.0 + np.abs(box.hi))
    lower = at_lo
    upper = at_hi & ~at_lo  # both sides active classifies as lower
    free = ~(lower | upper)
    return lower, upper, free


def classify_active(u, box: OrderInterval):
    """Partition indices into (active_lower, active_upper, free)."""
    u = as_vector(u, "u")
    lower, upper, free = _active_masks(u, box)
    return np.flatnonzero(lower), np.flatnonzero(upper), np.flatnonzero(free)


def _kkt_from_gradient(u: np.ndarray, box: OrderInterval, g: np.ndarray) -> float:
    # Exact comparisons, matching the clamp arithmetic of the solvers: an
    # index pinned by clamping sits on its bound bit-for-bit.  The relative
    # ACTIVE_RTOL band is only used for active-set *reporting*; using it here
    # would misclassify boxes whose sides differ by rounding dust.
    at_lo = u == box.lo
    at_hi = u == box.hi
    eq = box.lo == box.hi
    r = np.abs(g)
    r = np.where(at_lo, np.maximum(0.0, -g), r)
    r = np.where(at_hi & ~at_lo, np.maximum(0.0, g), r)
    r = np.where(eq, 0.0, r)
    return float(np.max(r)) + 0.0  # normalize -0.0


def kkt_residual(energy, box: OrderInterval, u) -> float:
    """Max-norm violation of box-constrained first-order optimality.

    Free indices contribute |grad_i|, lower-active ones max(0, -grad_i),
    upper-active ones max(0, grad_i), pinned (lo = hi) indices nothing.
    """
    u = as_vector(u, "u")
    slack = FEAS_RTOL * (1.0 + np.maximum(np.abs(box.lo), np.abs(box.hi)))
    if np.any(u < box.lo - slack) or np.any(u > box.hi + slack):
        raise PreconditionError("point lies outside the interval")
    return _kkt_from_gradient(u, box, np.asarray(energy.gradient(u)))


def _make_solution(energy, box: OrderInterval, u: np.ndarray, iterations: int,
                   converged: bool) -> Solution:
    u = clamp(u, box)
    g = np.asarray(energy.gradient(u))
    lower, upper, free = classify_active(u, box)
    res = _kkt_from_gradient(u, box, g)
    u.setflags(write=False)
    g.setflags(write=False)
    return Solution(u=u, grad=g, active_lower=lower, active_upper=upper,
                    free=free, kkt_residual=res, iterations=iterations,
                    converged=converged)


@njit(cache=True)
def _psor_sweep(indptr, indices, data, diag, b, lo, hi, u, omega):  # pragma: no cover - jit
    # Gauss-Seidel exclusion form of u_i <- u_i - omega (Au + b)_i / A_ii:
    # the diagonal term is kept out of the row sum so the unrelaxed sweep is
    # exactly monotone in the iterate (no u_i cancellation noise).
    n = u.shape[0]
    for i in range(n):
        acc = b[i]
        for k in range(indptr[i], indptr[i + 1]):
            j = indices[k]
            if j != i:
                acc += data[k] * u[j]
        x_gs = -acc / diag[i]
        if omega == 1.0:
            x = x_gs
        else:
            x = u[i] + omega * (x_gs - u[i])
        if x < lo[i]:
            x = lo[i]
        elif x > hi[i]:
            x = hi[i]
        u[i] = x


def _check_box_dim(energy, box: OrderInterval) -> None:
    if box.n != energy.n:
        raise PreconditionError(f"interval length {box.n} != energy dimension {energy.n}")


def solve_psor(energy: QuadraticEnergy, box: OrderInterval, tol: float = 1e-9,
               max_iter: int = 20000, omega: float = 1.5, u0=None,
               sweep_callback=None) -> Solution:
    """Projected SOR for a quadratic energy over [lo, hi].

    Sweeps the update u_i <- clamp(u_i - omega (Au + b)_i / A_ii) in fixed
    index order (Gauss-Seidel style, partially updated u) and tests the KKT
    residual after every sweep.  Requires a Z-matrix (submodular flag) or a
    strictly diagonally dominant matrix, and a strictly positive diagonal.

    When ``max_iter`` is exhausted the partial iterate is returned with
    ``converged=False``.  ``sweep_callback(u)`` is invoked with a copy of the
    iterate after each sweep (used by monotonicity audits).
    """
    if not isinstance(energy, QuadraticEnergy):
        raise SolverError("projected SOR needs a quadratic energy")
    _check_box_dim(energy, box)
    if not 0.0 < omega < 2.0:
        raise PreconditionError(f"relaxation omega = {omega} must lie in (0, 2)")
    diag = energy.diagonal()
    if np.any(diag <= 0.0):
        raise SolverError("projected SOR requires strictly positive diagonal entries")
    if not energy.submodular:
        offdiag_rowsum = np.abs(energy.a).sum(axis=1).A1 - np.abs(diag)
        if not np.all(np.abs(diag) > offdiag_rowsum):
            raise SolverError(
                "projected SOR requires a Z-matrix or strict diagonal dominance"
            )
    a = energy.a
    u = clamp(np.zeros(energy.n) if u0 is None else as_vector(u0, "u0"), box)
    sweeps = 0
    converged = False
    while sweeps < max_iter:
        _psor_sweep(a.indptr, a.indices, a.data, diag, energy.b,
                    box.lo, box.hi, u, omega)
        sweeps += 1
        if sweep_callback is not None:
            sweep_callback(u.copy())
        if _kkt_from_gradient(u, box, a @ u + energy.b) <= tol:
            converged = True
            break
    return _make_solution(energy, box, u, sweeps, converged)


def solve_projected_gradient(energy, box: OrderInterval, tol: float = 1e-8,
                             max_iter: int = 50000, u0=None,
                             step_callback=None) -> Solution:
    """Projected gradient with Armijo backtracking along the projection arc.

    Accepts any energy exposing ``value`` and ``gradient``; kernel energies
    must have p >= 2 so the gradient exists everywhere.  Each step tries
    u_new = clamp(u - alpha grad) from alpha = 1, halving until the Armijo
    sufficient-decrease test passes; the energy therefore never increases.
    Stops when both the unit-step projected-gradient norm
    ||u - clamp(u - grad)||_inf and the KKT residual fall below ``tol``.
    """
    if isinstance(energy, KernelEnergy) and energy.p < 2:
        raise SolverError(f"projected gradient requires p >= 2, got p = {energy.p}")
    _check_box_dim(energy, box)
    u = clamp(np.zeros(energy.n) if u0 is None else as_vector(u0, "u0"), box)
    f = energy.value(u)
    steps = 0
    converged = False
    while steps < max_iter:
        g = np.asarray(energy.gradient(u))
        pg_norm = float(np.max(np.abs(u - clamp(u - g, box))))
        if max(pg_norm, _kkt_from_gradient(u, box, g)) <= tol:
            converged = True
            break
        alpha = ARMIJO_STEP0
        accepted = False
        while alpha >= ARMIJO_FLOOR:
            cand = clamp(u - alpha * g, box)
            f_cand = energy.value(cand)
            if f_cand <= f + ARMIJO_DECREASE * float(g @ (cand - u)):
                accepted = True
                break
            alpha *= ARMIJO_SHRINK
        if not accepted:
            raise SolverError(
                "line search hit the backtracking floor without an energy decrease"
            )
        u, f = cand, f_cand
        steps += 1
        if step_callback is not None:
            step_callback(u.copy(), f)
    return _make_solution(energy, box, u, steps, converged)


def brute_force_active_set(energy: QuadraticEnergy, box: OrderInterval) -> Solution:
    """Enumerate every activity pattern and return the feasible KKT point.

    For each of the 3^n patterns (each index pinned low, pinned high, or
    free) the free block is solved exactly, feasibility and multiplier signs
    are checked, and the first pattern passing all checks wins; by convexity
    it is a global minimizer.  Patterns whose free block is singular are
    skipped.  Enumeration order is fixed, so the result is deterministic.
    """
    if not isinstance(energy, QuadraticEnergy):
        raise SolverError("the brute-force oracle needs a quadratic energy")
    _check_box_dim(energy, box)
    n = energy.n
    if n > 12:
        raise SolverError(f"brute-force enumeration is limited to n <= 12, got {n}")
    a = energy.a.toarray()
    b = energy.b
    lo, hi = box.lo, box.hi
    pinned_eq = lo == hi  # no sign condition where the box is a point
    feas_slack = FEAS_RTOL * (1.0 + np.maximum(np.abs(lo), np.abs(hi)))
    examined = 0
    for free_mask in range(1 << n):
        f_idx = np.array([i for i in range(n) if free_mask >> i & 1], dtype=int)
        p_idx = np.array([i for i in range(n) if not free_mask >> i & 1], dtype=int)
        n_p = p_idx.size
        cols = 1 << n_p
        side_bits = (np.arange(cols)[None, :] >> np.arange(n_p)[:, None]) & 1
        u_p = np.where(side_bits == 1, hi[p_idx, None], lo[p_idx, None])
        cand = np.empty((n, cols))
        cand[p_idx] = u_p
        if f_idx.size:
            rhs = -b[f_idx, None] - a[np.ix_(f_idx, p_idx)] @ u_p
            try:
                x = np.linalg.solve(a[np.ix_(f_idx, f_idx)], rhs)
            except np.linalg.LinAlgError:
                examined += cols
                continue
            cand[f_idx] = x
        examined += cols
        feasible = np.all(
            (cand >= lo[:, None] - feas_slack[:, None])
            & (cand <= hi[:, None] + feas_slack[:, None]),
            axis=0,
        )
        if not np.any(feasible):
            continue
        grad = a @ cand + b[:, None]
        ok = feasible.copy()
        if f_idx.size:
            ok &= np.all(np.abs(grad[f_idx]) <= ORACLE_SIGN_TOL, axis=0)
        if n_p:
            signable = ~pinned_eq[p_idx]
            low_side = (side_bits == 0) & signable[:, None]
            high_side = (side_bits == 1) & signable[:, None]
            ok &= np.all(np.where(low_side, grad[p_idx] >= -ORACLE_SIGN_TOL, True), axis=0)
            ok &= np.all(np.where(high_side, grad[p_idx] <= ORACLE_SIGN_TOL, True), axis=0)
        hits = np.flatnonzero(ok)
        if hits.size:
            u = cand[:, hits[0]]
            return _make_solution(energy, box, u, examined, True)
    raise SolverError("no feasible KKT pattern found (is the matrix PSD?)")
