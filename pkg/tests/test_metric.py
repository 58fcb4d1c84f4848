import json
from pathlib import Path

import numpy as np
import pytest

from obslat.certificates import lipschitz_ratio
from obslat.errors import (
    CertificateError,
    ConstructionError,
    ObstacleOrderError,
    PreconditionError,
)
from obslat.instances import grid_space, path_space, random_c_concave, random_planar_metric
from obslat.lattice import OrderInterval
from obslat.metric import (
    FiniteMetricSpace,
    GraphSpace,
    build_cutoff,
    c_transform,
    coincidence_cc_report,
    cutoff_obstacles,
    hopf_lax,
    interpolation_duality_check,
    is_c_concave,
    kantorovich_regularize,
    metric_space_from_json_dict,
)
from obslat.solvers import solve_psor

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def two_points():
    return FiniteMetricSpace(np.array([[0.0, 1.0], [1.0, 0.0]]))


# ------------------------------------------------------------------ spaces

def test_metric_validation():
    with pytest.raises(ConstructionError):
        FiniteMetricSpace(np.array([[0.0, 1.0], [2.0, 0.0]]))  # asymmetric
    with pytest.raises(ConstructionError):
        FiniteMetricSpace(np.array([[0.5]]))  # nonzero diagonal
    with pytest.raises(ConstructionError):
        FiniteMetricSpace(np.array([[0.0, 0.0], [0.0, 0.0]]))  # zero off-diag
    with pytest.raises(ConstructionError):
        # triangle inequality: d(0,2) = 5 > 1 + 1
        FiniteMetricSpace(np.array([[0.0, 1.0, 5.0],
                                    [1.0, 0.0, 1.0],
                                    [5.0, 1.0, 0.0]]))


def test_graph_space_shortest_paths():
    space = path_space(4, weight=2.0)
    assert space.D[0, 3] == 6.0
    with pytest.raises(ConstructionError):
        GraphSpace.from_graph(4, [(0, 1, 1.0), (2, 3, 1.0)])  # disconnected


def test_metric_json_roundtrip():
    space = random_planar_metric(np.random.default_rng(2), 6)
    back = metric_space_from_json_dict(space.to_json_dict())
    assert np.allclose(back.D, space.D, atol=0)
    graph = path_space(5)
    back2 = metric_space_from_json_dict(graph.to_json_dict())
    assert isinstance(back2, GraphSpace)
    assert np.array_equal(back2.D, graph.D)
    with pytest.raises(ConstructionError):
        metric_space_from_json_dict({"points": 3, "distances": [1.0]})


# ---------------------------------------------------------------- Hopf-Lax

def test_hopf_lax_two_point_example(two_points):
    q = hopf_lax(two_points, [0.0, -2.0], 0.5)
    assert np.array_equal(q, [-1.0, -2.0])


def test_hopf_lax_constant_and_monotone(two_points):
    c = np.array([0.7, 0.7])
    assert np.array_equal(hopf_lax(two_points, c, 0.3), c)
    rng = np.random.default_rng(5)
    for _ in range(20):
        space = random_planar_metric(rng, 8)
        psi = rng.normal(size=8)
        q1 = hopf_lax(space, psi, 0.2)
        q2 = hopf_lax(space, psi, 0.9)
        assert np.all(q1 <= psi + 1e-12)
        assert np.all(q2 <= q1 + 1e-12)


def test_hopf_lax_requires_positive_time(two_points):
    with pytest.raises(PreconditionError):
        hopf_lax(two_points, [0.0, 0.0], 0.0)


def test_c_transform_examples(two_points):
    assert np.array_equal(c_transform(two_points, [0.0, 0.0]), [0.0, 0.0])
    assert np.array_equal(c_transform(two_points, [0.0, -0.3]), [0.0, 0.3])
    rng = np.random.default_rng(7)
    for _ in range(20):
        space = random_planar_metric(rng, 10)
        psi = rng.normal(size=10)
        psi_c = c_transform(space, psi)
        triple = c_transform(space, c_transform(space, psi_c))
        assert np.max(np.abs(triple - psi_c)) <= 1e-12


def test_is_c_concave(two_points):
    assert is_c_concave(two_points, [0.0, 0.0]).passed
    assert is_c_concave(two_points, [0.0, -0.3]).passed
    assert not is_c_concave(two_points, [0.0, 10.0]).passed
    rng = np.random.default_rng(9)
    space = random_planar_metric(rng, 12)
    phi = random_c_concave(rng, space)
    assert is_c_concave(space, phi).passed
    # phi^cc >= phi for arbitrary phi
    raw = rng.normal(size=12)
    cc = c_transform(space, c_transform(space, raw))
    assert np.all(cc >= raw - 1e-12)


# ------------------------------------------------------------------ cutoff

def test_cutoff_obstacles_path5():
    space = path_space(5)
    phi, psi, r2 = cutoff_obstacles(space, [2], [1, 2, 3])
    assert r2 == 1.0
    expected = np.array([0.0, 0.5, 1.0, 0.5, 0.0])
    assert np.array_equal(phi, expected)
    assert np.array_equal(psi, expected)


def test_cutoff_paper_radius_discrepancy():
    space = path_space(5)
    with pytest.raises(ObstacleOrderError) as err:
        cutoff_obstacles(space, [2], [1, 2, 3], paper_radius=True)
    assert err.value.violation == pytest.approx(0.5)
    assert err.value.lo[1] == pytest.approx(0.75)
    assert err.value.hi[1] == pytest.approx(0.25)


def test_cutoff_preconditions():
    space = path_space(5)
    with pytest.raises(ConstructionError):
        cutoff_obstacles(space, [], [1, 2, 3])
    with pytest.raises(ConstructionError):
        cutoff_obstacles(space, [4], [1, 2, 3])  # core not inside region
    with pytest.raises(ConstructionError):
        cutoff_obstacles(space, [2], list(range(5)))  # empty complement


def test_cutoff_grid5x5_golden():
    golden = json.loads((GOLDEN / "cutoff_grid5x5.json").read_text())
    space = grid_space(5, 5)
    phi, psi, r2 = cutoff_obstacles(space, golden["core"], golden["region"])
    assert r2 == golden["r2"]
    assert np.array_equal(phi, golden["phi"])
    assert np.array_equal(psi, golden["psi"])
    assert psi[golden["core"][0]] == 1.0


def test_build_cutoff_path5_singleton():
    space = path_space(5)
    omega, cert = build_cutoff(space, [2], [1, 2, 3])
    assert np.array_equal(omega, [0.0, 0.5, 1.0, 0.5, 0.0])
    assert cert.passed


def test_build_cutoff_path11_golden():
    golden = json.loads((GOLDEN / "cutoff_path11.json").read_text())
    space = path_space(11)
    omega, cert = build_cutoff(space, golden["core"], golden["region"], tol=1e-11)
    assert np.max(np.abs(omega - np.array(golden["omega"]))) <= 1e-9
    assert cert.passed
    assert cert.lower_slack_min >= -1e-9 and cert.upper_slack_min >= -1e-9


def test_build_cutoff_grid15():
    space = grid_space(15, 15)
    core = [i * 15 + j for i in range(6, 9) for j in range(6, 9)]
    region = [i * 15 + j for i in range(3, 12) for j in range(3, 12)]
    omega, cert = build_cutoff(space, core, region)
    out = sorted(set(range(225)) - set(region))
    assert np.all(omega[core] == 1.0)
    assert np.all(omega[out] == 0.0)
    assert cert.passed
    energy = space.dirichlet_energy
    phi, psi, _ = cutoff_obstacles(space, core, region)
    lap = -energy.gradient(omega)
    bound = max(
        np.max(np.abs(np.minimum(-energy.gradient(phi), 0.0))),
        np.max(np.abs(np.maximum(-energy.gradient(psi), 0.0))),
    )
    assert np.max(np.abs(lap)) <= bound + 1e-8
    ratio = lipschitz_ratio(space, omega, phi, psi)
    assert np.isfinite(ratio) and ratio > 0.0


def test_build_cutoff_requires_graph_space():
    cloud = random_planar_metric(np.random.default_rng(3), 6)
    with pytest.raises(PreconditionError):
        build_cutoff(cloud, [0], [0, 1, 2])


# ------------------------------------------------------------- kantorovich

def test_kantorovich_two_point_worked_example():
    space = GraphSpace.from_graph(2, [(0, 1, 1.0)])
    eta, pair, cert = kantorovich_regularize(space, [0.0, -0.3], 0.5)
    assert np.allclose(hopf_lax(space, [0.0, 0.3], 0.5), [0.0, 0.3], atol=0)
    assert np.array_equal(pair.lo, pair.hi)
    assert np.allclose(pair.lo, [0.0, -0.3], atol=0)
    assert np.allclose(eta, [0.0, -0.3], atol=0)
    assert np.array_equal(pair.coincidence_set, [0, 1])
    assert cert.passed


def test_kantorovich_zero_potential():
    space = path_space(6)
    eta, pair, cert = kantorovich_regularize(space, np.zeros(6), 0.3)
    assert np.array_equal(pair.lo, np.zeros(6))
    assert np.array_equal(pair.hi, np.zeros(6))
    assert np.array_equal(eta, np.zeros(6))
    assert cert.passed


def test_kantorovich_rejects_non_c_concave():
    space = path_space(4)
    bad = np.array([0.0, 5.0, 0.0, 0.0])
    with pytest.raises(PreconditionError):
        kantorovich_regularize(space, bad, 0.5)
    eta, pair, cert = kantorovich_regularize(space, bad, 0.5, cc_regularize=True)
    assert is_c_concave(space, pair.phi).passed
    assert cert.passed
    with pytest.raises(PreconditionError):
        kantorovich_regularize(space, np.zeros(4), 1.0)


def test_kantorovich_line21_properties():
    rng = np.random.default_rng(11)
    space = path_space(21, weight=1.0 / 20.0)
    for t in (0.25, 0.5, 0.75):
        phi = random_c_concave(rng, space, scale=0.2)
        eta, pair, cert = kantorovich_regularize(space, phi, t)
        assert np.all(pair.lo <= pair.hi)
        assert cert.passed
        idx = pair.coincidence_set
        if idx.size:
            assert np.max(np.abs(eta[idx] - pair.lo[idx])) <= 1e-9
        report = coincidence_cc_report(space, pair, eta)
        assert report["derived_minus_t_eta"] <= 1e-8
        assert report["derived_one_minus_t_eta"] <= 1e-8


def test_interpolation_duality():
    space = path_space(2)
    ok, slack = interpolation_duality_check(space, [0.0, -0.3], 0.5)
    assert ok and slack == 0.0
    rng = np.random.default_rng(13)
    for _ in range(25):
        cloud = random_planar_metric(rng, 10)
        phi = random_c_concave(rng, cloud, scale=0.4)
        t = float(rng.uniform(0.05, 0.95))
        ok, slack = interpolation_duality_check(cloud, phi, t, tol=1e-12)
        assert ok, slack
    with pytest.raises(PreconditionError):
        interpolation_duality_check(space, [0.0, 10.0], 0.5)


def test_potential_bounds_coincide_under_solver(two_points):
    # eta clamps wherever the two bounds agree: solve with PSOR directly
    space = path_space(9)
    rng = np.random.default_rng(17)
    phi = random_c_concave(rng, space, scale=0.3)
    _, pair, _ = kantorovich_regularize(space, phi, 0.4)
    box = OrderInterval(pair.lo, pair.hi)
    sol = solve_psor(space.dirichlet_energy, box, tol=1e-10)
    idx = pair.coincidence_set
    if idx.size:
        assert np.max(np.abs(sol.u[idx] - pair.lo[idx])) <= 1e-9
