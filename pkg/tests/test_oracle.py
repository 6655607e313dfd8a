import math
import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings, strategies as st

import util
import bloch
import solver
import oracle
import pauli
import fixtures
from conftest import random_bloch

EX, EY, EZ = np.eye(3)
ORIGIN = np.zeros(3)

def states(*vectors): return bloch.StateSet.from_vectors(vectors)

@pytest.mark.parametrize("v,expected", [
    ([0.3, 0.7], [0.3, 0.7]),
    ([1.5, 0.5], [1, 0]),
    ([-1, -1, 3], [0, 0, 1]),
    ([0, 0, 0, 0], [0.25, 0.25, 0.25, 0.25]),
])
def test_simplex_project(v, expected):
    npt.assert_allclose(oracle.simplex_project(v), expected, atol=1e-15)

def test_simplex_project_rejects():
    with pytest.raises(util.ValidationError):
        oracle.simplex_project([])
    with pytest.raises(util.ValidationError):
        oracle.simplex_project([0.5, float("nan")])

@given(st.lists(st.floats(min_value=-5, max_value=5, allow_nan=False), min_size=1, max_size=10))
def test_simplex_project_is_feasible(v):
    p = oracle.simplex_project(v)
    assert p.min() >= 0
    assert p.sum() == pytest.approx(1, abs=1e-12)
    # projection optimality: v - p is constant on the support and no larger off it
    w = np.asarray(v) - p
    support = p > 0
    assert np.ptp(w[support]) <= 1e-12
    if not support.all(): assert w[~support].max() <= w[support].min() + 1e-12

def test_simplex_project_beats_grid(rng):
    grid = oracle._grid_points(3, np.zeros(2), np.ones(2), 1000)
    for _ in range(3):
        v = rng.normal(scale=1.5, size=3)
        p = oracle.simplex_project(v)
        assert np.linalg.norm(p - v) <= np.linalg.norm(grid - v, axis=1).min() + 1e-12

def test_gradient_matches_finite_differences(rng):
    for _ in range(20):
        n = int(rng.integers(2, 7))
        R = random_bloch(rng, n).T
        r_o = random_bloch(rng, 1)[0]
        p = rng.dirichlet(np.ones(n))
        grad = oracle.objective_gradient(r_o, R, p)
        h = 1e-6
        numeric = np.array([ (oracle.objective(r_o, R, p + h * e) - oracle.objective(r_o, R, p - h * e)) / (2 * h) for e in np.eye(n) ])
        npt.assert_allclose(grad, numeric, rtol=1e-6, atol=1e-9)
        npt.assert_allclose(grad, bloch.hessian(bloch.StateSet.from_vectors(R.T)) @ p - 2 * R.T @ r_o, atol=1e-12)

def test_oracle_target_in_set():
    s = states([0.1, 0.2, 0.3], EX, [0, -0.5, 0.5])
    res = oracle.oracle_solve(EX, s)
    assert res.branch == solver.Branch.ORACLE
    assert res.distance <= 1e-8

@pytest.mark.parametrize("vectors,r_o", [
    ([EZ, -EZ], [0, 0, 0.2]),
    ([EX, ORIGIN], [-0.3, 0, 0]),
    ([EX, ORIGIN], [0.5, 0.5, 0]),
    ([EZ, -EZ], [0.6, 0, 0.2]),
    ([EX, EY, EZ], [1 / 3, 1 / 3, 1 / 3]),
    ([EX, EY, EZ], [0, 0, 0]),
    ([EZ, ORIGIN, -EZ], [0, 0, 0.4]),
    ([EZ, -EZ, EX, EY], [0.2, 0.2, 0.2]),
])
def test_oracle_matches_closed_forms(vectors, r_o):
    s = states(*vectors)
    assert oracle.oracle_solve(r_o, s).distance == pytest.approx(solver.solve(r_o, s).distance, abs=1e-6)

def test_oracle_backtracking():
    s = states(EX, EY, EZ, [0.2, -0.4, 0.1])
    cfg = oracle.OracleConfig(step_rule="backtracking")
    r_o = [-0.5, -0.5, 0.3]
    assert oracle.oracle_solve(r_o, s, cfg).distance == pytest.approx(solver.solve(r_o, s).distance, abs=1e-6)

def test_oracle_monotone_descent(rng):
    for _ in range(10):
        n = int(rng.integers(2, 9))
        s = bloch.StateSet.from_vectors(random_bloch(rng, n))
        history = []
        oracle.oracle_solve(random_bloch(rng, 1)[0], s, history=history)
        assert len(history) >= 2
        assert np.all(np.diff(history) <= 1e-15)

def test_oracle_against_closed_form_random(rng):
    for _ in range(1000):
        n = int(rng.integers(2, 9))
        s = bloch.StateSet.from_vectors(random_bloch(rng, n))
        r_o = random_bloch(rng, 1)[0]
        d_oracle = oracle.oracle_solve(r_o, s).distance
        d_closed = solver.solve(r_o, s).distance
        assert d_oracle == pytest.approx(d_closed, abs=1e-5)
        # the closed form is a global minimum, so the oracle can never beat it
        assert d_closed <= d_oracle + 1e-7

def test_polish_face_adds_states():
    R = np.column_stack([EX, EY, EZ])
    npt.assert_allclose(oracle.polish_face(ORIGIN, R, [0.5, 0.5, 0]), [1 / 3, 1 / 3, 1 / 3], atol=1e-12)

def test_polish_face_drops_states():
    R = np.column_stack([EX, ORIGIN])
    npt.assert_allclose(oracle.polish_face(np.array([-0.3, 0, 0]), R, [0.5, 0.5]), [0, 1], atol=1e-15)

def test_polish_face_never_worse(rng):
    for _ in range(50):
        n = int(rng.integers(2, 9))
        R = random_bloch(rng, n).T
        r_o = random_bloch(rng, 1)[0]
        p = rng.dirichlet(np.ones(n))
        if rng.random() < 0.5: p = oracle.simplex_project(np.where(rng.random(n) < 0.4, 0, p))
        q = oracle.polish_face(r_o, R, p)
        assert q.min() >= 0
        assert q.sum() == pytest.approx(1, abs=1e-12)
        assert oracle.objective(r_o, R, q) <= oracle.objective(r_o, R, p) + 1e-14

def test_polish_face_zero_optimum():
    s = pauli.specs_to_states(pauli.SIX_STATES)
    R = s.bloch_matrix()
    r_o = np.array([0.1, -0.2, 0.3])
    q = oracle.polish_face(r_o, R, np.full(6, 1 / 6))
    assert oracle.objective(r_o, R, q) <= 1e-24

def test_oracle_nearly_coplanar_set():
    # the four ex4 states are nearly coplanar
    s = fixtures.fixture("ex4")
    r_o = bloch.bloch_from_params(bloch.TargetParams(0.3135, 0.07, math.pi))
    res = oracle.oracle_solve(r_o, s)
    assert res.distance == pytest.approx(solver.solve(r_o, s).distance, abs=1e-8)
    assert oracle.oracle_solve(r_o, s, oracle.OracleConfig(step_rule="backtracking")).distance == pytest.approx(res.distance, abs=1e-8)

@pytest.mark.parametrize("phi", [0.5 * math.pi, math.pi, 1.5 * math.pi, 2 * math.pi])
def test_oracle_target_inside_hull(phi):
    s = fixtures.fixture("ex6", allow_invalid_states=True)
    r_o = bloch.bloch_from_params(bloch.TargetParams(0.3, 0.5, phi))
    assert oracle.oracle_solve(r_o, s).distance == pytest.approx(solver.solve(r_o, s).distance, abs=1e-8)

def test_oracle_non_convergence():
    s = states(EX, EY, EZ)
    with pytest.raises(util.ConvergenceError) as e:
        oracle.oracle_solve([-0.3, 0.1, 0.2], s, oracle.OracleConfig(max_iterations=1))
    assert e.value.iterations == 1

def test_oracle_all_mixed():
    res = oracle.oracle_solve([0, 0, 0.5], states(ORIGIN, ORIGIN))
    assert res.distance == pytest.approx(0.5)
    npt.assert_allclose(res.weights, [0.5, 0.5])

def test_grid_mode_matches_gradient():
    s = states(EX, ORIGIN)
    for r_o in ([0.5, 0.5, 0], [-0.3, 0, 0], [0.3, -0.2, 0.6]):
        assert oracle.oracle_grid(r_o, s).distance == pytest.approx(oracle.oracle_solve(r_o, s).distance, abs=1e-6)
    s = states(EX, EY, EZ)
    for r_o in ([0, 0, 0], [-0.6, 0.6, 0], [0.5, 0.3, 0.1]):
        assert oracle.oracle_grid(r_o, s).distance == pytest.approx(oracle.oracle_solve(r_o, s).distance, abs=1e-6)

def test_grid_mode_limits():
    with pytest.raises(util.ContractError):
        oracle.oracle_grid([0, 0, 0], states(EX, EY, EZ, -EX))
    assert oracle.oracle_grid([0, 0, 0.5], states(EX)).distance == pytest.approx(math.sqrt(1.25))

def test_oracle_config():
    cfg = oracle.OracleConfig.from_config({ "max_iterations": 10 })
    assert cfg.max_iterations == 10
    assert cfg.step_rule == "fixed"
    with pytest.raises(util.ValidationError):
        oracle.OracleConfig(max_iterations=0)
    with pytest.raises(util.ValidationError):
        oracle.OracleConfig(step_rule="newton")
    with pytest.raises(util.ValidationError):
        oracle.OracleConfig(gap_tol=0)
    with pytest.raises(util.ValidationError):
        oracle.OracleConfig(polish_every=-1)
    assert oracle.OracleConfig(polish_every=0).polish_every == 0
    with pytest.raises(util.ValidationError):
        oracle.OracleConfig.from_config({ "tolerance": 1 })
