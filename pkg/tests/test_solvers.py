import numpy as np
import pytest

from obslat.energies import KernelEnergy, QuadraticEnergy, fractional_kernel_1d
from obslat.errors import PreconditionError, SolverError
from obslat.instances import random_box, random_submodular_quadratic
from obslat.lattice import UNBOUNDED, OrderInterval
from obslat.solvers import (
    brute_force_active_set,
    classify_active,
    kkt_residual,
    solve_projected_gradient,
    solve_psor,
)

TRIDIAG = [(0, 0, 2.0), (1, 1, 2.0), (2, 2, 2.0),
           (0, 1, -1.0), (1, 0, -1.0), (1, 2, -1.0), (2, 1, -1.0)]


@pytest.fixture
def tridiag():
    return QuadraticEnergy.from_triplets(3, TRIDIAG)


@pytest.fixture
def tridiag_box():
    return OrderInterval([0.5, 1.0, 0.5], [10.0, 10.0, 10.0])


def test_psor_tridiag_instance(tridiag, tridiag_box):
    # KKT oracle: u = lo is stationary with multiplier Au = (0,1,0) >= 0 on
    # the fully lower-active set, so it is the minimizer.
    sol = solve_psor(tridiag, tridiag_box, tol=1e-9)
    assert sol.converged
    assert np.array_equal(sol.u, [0.5, 1.0, 0.5])
    assert np.array_equal(sol.grad, [0.0, 1.0, 0.0])
    assert np.array_equal(sol.active_lower, [0, 1, 2])
    assert sol.active_upper.size == 0 and sol.free.size == 0
    oracle = brute_force_active_set(tridiag, tridiag_box)
    assert np.allclose(sol.u, oracle.u, atol=1e-12)


def test_psor_singleton_interval(tridiag):
    box = OrderInterval([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    sol = solve_psor(tridiag, box)
    assert sol.converged and sol.iterations == 1
    assert np.array_equal(sol.u, box.lo)
    assert sol.kkt_residual == 0.0


def test_psor_inactive_obstacles(tridiag):
    box = OrderInterval([-1.0] * 3, [1.0] * 3)
    sol = solve_psor(tridiag, box)
    assert sol.converged
    assert np.allclose(sol.u, 0.0, atol=1e-10)
    assert sol.free.size == 3


def test_psor_parameter_errors(tridiag, tridiag_box):
    with pytest.raises(PreconditionError):
        solve_psor(tridiag, tridiag_box, omega=2.0)
    with pytest.raises(PreconditionError):
        solve_psor(tridiag, OrderInterval([0.0], [1.0]))
    zero_diag = QuadraticEnergy(np.zeros((2, 2)))
    with pytest.raises(SolverError):
        solve_psor(zero_diag, OrderInterval([0.0, 0.0], [1.0, 1.0]))


def test_psor_requires_zmatrix_or_dominance():
    # PSD, not a Z-matrix, not strictly diagonally dominant
    a = np.array([[1.0, 1.0], [1.0, 1.0]])
    energy = QuadraticEnergy(a)
    assert not energy.submodular
    with pytest.raises(SolverError):
        solve_psor(energy, OrderInterval([0.0, 0.0], [1.0, 1.0]))
    # strictly dominant non-Z matrices are accepted
    dominant = QuadraticEnergy(np.array([[2.0, 0.5], [0.5, 2.0]]))
    sol = solve_psor(dominant, OrderInterval([-1.0, -1.0], [1.0, 1.0]))
    assert sol.converged


def test_psor_max_iter_flags_nonconvergence(tridiag):
    box = OrderInterval([-5.0] * 3, [5.0] * 3)
    sol = solve_psor(tridiag, box, tol=1e-14, max_iter=1,
                     u0=np.array([4.0, -3.0, 2.0]))
    assert not sol.converged
    assert sol.iterations == 1
    assert box.contains(sol.u)


def test_psor_monotone_from_upper_start():
    rng = np.random.default_rng(23)
    for _ in range(5):
        n = int(rng.integers(3, 15))
        energy = random_submodular_quadratic(rng, n)
        box = random_box(rng, n)
        prev = box.hi.copy()
        def check(u, prev_holder=[prev]):
            assert np.all(u <= prev_holder[0])
            assert box.contains(u)
            prev_holder[0] = u
        solve_psor(energy, box, omega=1.0, u0=box.hi, sweep_callback=check)


def test_projected_gradient_agrees_with_psor(tridiag, tridiag_box):
    pg = solve_projected_gradient(tridiag, tridiag_box, tol=1e-9)
    ps = solve_psor(tridiag, tridiag_box, tol=1e-9)
    assert pg.converged
    assert np.max(np.abs(pg.u - ps.u)) <= 1e-7


def test_projected_gradient_symmetric_box(tridiag):
    box = OrderInterval([-2.0] * 3, [2.0] * 3)
    sol = solve_projected_gradient(tridiag, box, tol=1e-10)
    assert sol.converged
    assert np.allclose(sol.u, 0.0, atol=1e-9)


def test_projected_gradient_energy_descent():
    energy = fractional_kernel_1d(12, 1.0 / 13.0, 0.5, 3.0, 3)
    lo = 0.2 * np.ones(12)
    box = OrderInterval(lo, np.ones(12))
    values = []
    sol = solve_projected_gradient(energy, box, tol=1e-9,
                                   step_callback=lambda u, f: values.append(f))
    assert sol.converged
    assert np.all(sol.u >= lo)
    diffs = np.diff(np.array(values))
    assert np.all(diffs <= 1e-12)


def test_projected_gradient_rejects_small_p():
    energy = KernelEnergy(2, [(0, 1, 1.0)], [], 1.5)
    with pytest.raises(SolverError):
        solve_projected_gradient(energy, OrderInterval([0.0, 0.0], [1.0, 1.0]))


def test_brute_force_closed_forms():
    free = QuadraticEnergy(np.array([[2.0]]), np.array([-1.0]))
    sol = brute_force_active_set(free, OrderInterval([0.0], [10.0]))
    assert sol.u[0] == pytest.approx(0.5, abs=1e-12)  # -b/A inside the box
    assert sol.free.size == 1
    pinned = brute_force_active_set(free, OrderInterval([1.0], [2.0]))
    assert pinned.u[0] == pytest.approx(1.0)
    assert pinned.grad[0] == pytest.approx(1.0)  # multiplier >= 0 at lower bound
    assert np.array_equal(pinned.active_lower, [0])


def test_brute_force_size_cap():
    energy = QuadraticEnergy(np.eye(13))
    box = OrderInterval(np.zeros(13), np.ones(13))
    with pytest.raises(SolverError):
        brute_force_active_set(energy, box)


def test_oracle_equivalence_random_sample():
    rng = np.random.default_rng(31)
    for _ in range(10):
        n = int(rng.integers(2, 11))
        energy = random_submodular_quadratic(rng, n)
        box = random_box(rng, n)
        sol = solve_psor(energy, box, tol=1e-9)
        oracle = brute_force_active_set(energy, box)
        assert sol.converged
        assert np.max(np.abs(sol.u - oracle.u)) <= 1e-7


def test_oracle_handles_one_sided_box():
    energy = QuadraticEnergy(np.array([[2.0, -1.0], [-1.0, 2.0]]),
                             np.array([-1.0, 0.5]))
    box = OrderInterval([0.3, 0.3], [UNBOUNDED, UNBOUNDED])
    sol = brute_force_active_set(energy, box)
    ps = solve_psor(energy, box, tol=1e-10)
    assert np.max(np.abs(sol.u - ps.u)) <= 1e-8


def test_kkt_residual_cases(tridiag, tridiag_box):
    sol = solve_psor(tridiag, tridiag_box, tol=1e-9)
    assert kkt_residual(tridiag, tridiag_box, sol.u) == 0.0
    # interior point: residual reduces to the gradient max norm
    box = OrderInterval([-10.0] * 3, [10.0] * 3)
    u = np.array([0.5, 1.0, 0.5])
    assert kkt_residual(tridiag, box, u) == 1.0
    pinned = OrderInterval([1.0] * 3, [1.0] * 3)
    assert kkt_residual(tridiag, pinned, np.ones(3)) == 0.0
    with pytest.raises(PreconditionError):
        kkt_residual(tridiag, tridiag_box, np.zeros(3))


def test_classification_tie_breaks():
    box = OrderInterval([0.0, 0.0, 0.0], [0.0, 1.0, 1.0])
    lower, upper, free = classify_active(np.array([0.0, 1.0, 0.5]), box)
    assert np.array_equal(lower, [0])  # lo == hi classifies as lower
    assert np.array_equal(upper, [1])
    assert np.array_equal(free, [2])


def test_comparison_principle_path():
    # harmonic extension lies below every lower-obstacle solution
    rng = np.random.default_rng(41)
    from obslat.energies import graph_dirichlet

    for _ in range(10):
        n = int(rng.integers(5, 12))
        pinned = graph_dirichlet(n, [(i, i + 1, 1.0) for i in range(n - 1)],
                                 [0, n - 1])
        vals = rng.uniform(-1, 1, size=2)
        energy = QuadraticEnergy(pinned.a, pinned.coupling @ vals)
        big = OrderInterval(np.full(energy.n, -UNBOUNDED), np.full(energy.n, UNBOUNDED))
        u_harm = solve_psor(energy, big, tol=1e-11).u
        obstacle = u_harm + rng.uniform(0.0, 0.5, size=energy.n) - 0.2
        u_obs = solve_psor(energy, OrderInterval(obstacle, np.full(energy.n, UNBOUNDED)),
                           tol=1e-11).u
        assert np.all(u_harm <= u_obs + 1e-9)
