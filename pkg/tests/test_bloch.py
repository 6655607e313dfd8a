import math
import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings, strategies as st

import util
import bloch
from conftest import random_bloch

PAULI = [np.array([[0, 1], [1, 0]], dtype=complex), np.array([[0, -1j], [1j, 0]]), np.array([[1, 0], [0, -1]], dtype=complex)]

def density_matrix(r):
    return 0.5 * (np.eye(2) + sum(c * s for c, s in zip(r, PAULI)))

def params_density_matrix(a, k, phi):
    off = k * math.sqrt(a * (1 - a))
    return np.array([[1 - a, off * np.exp(-1j * phi)], [off * np.exp(1j * phi), a]])

def trace_norm(m):
    return float(np.abs(np.linalg.eigvalsh(m)).sum())

unit = st.floats(min_value=0, max_value=1, allow_nan=False)
phase = st.floats(min_value=-10, max_value=10, allow_nan=False)
vectors = st.lists(st.floats(min_value=-1, max_value=1, allow_nan=False), min_size=3, max_size=3).map(np.array).filter(lambda v: v @ v <= 1)

@pytest.mark.parametrize("params,expected", [
    ((0.5, 0, 0), (0, 0, 0)),
    ((0, 1, 0), (0, 0, 1)),
    ((0.3, 0.5, math.pi / 4), (0.32403703492039304, 0.32403703492039304, 0.4)),
])
def test_bloch_from_params(params, expected):
    npt.assert_allclose(bloch.bloch_from_params(bloch.TargetParams(*params)), expected, atol=1e-15)

@given(unit, unit, phase)
def test_bloch_from_params_matches_density_matrix(a, k, phi):
    rho = params_density_matrix(a, k, phi)
    from_rho = [np.trace(rho @ s).real for s in PAULI]
    r = bloch.bloch_from_params(bloch.TargetParams(a, k, phi))
    npt.assert_allclose(r, from_rho, atol=1e-12)
    assert r @ r <= 1 + 1e-12

@given(st.floats(min_value=0.01, max_value=0.99), st.floats(min_value=0.01, max_value=1), st.floats(min_value=0, max_value=2 * math.pi))
def test_params_round_trip(a, k, phi):
    t = bloch.params_from_bloch(bloch.bloch_from_params(bloch.TargetParams(a, k, phi)))
    assert t.a == pytest.approx(a, abs=1e-10)
    assert t.k == pytest.approx(k, abs=1e-10)
    assert abs(np.angle(np.exp(1j * (t.phi - phi)))) <= 1e-10

def test_params_from_bloch_unidentifiable():
    assert bloch.params_from_bloch([0, 0, 1]) == bloch.TargetParams(0, 0, 0)
    t = bloch.params_from_bloch([0, 0, 0.2])
    assert (t.a, t.k, t.phi) == (pytest.approx(0.4, abs=1e-15), 0, 0)

@pytest.mark.parametrize("params", [(1.2, 0.5, 0), (-0.1, 0.5, 0), (0.5, 1.5, 0), (0.5, 0.5, float("nan")), (0.5, 0.5, float("inf")), ("0.5", 0.5, 0), (True, 0.5, 0)])
def test_target_params_rejects(params):
    with pytest.raises(util.ValidationError):
        bloch.TargetParams(*params)

def test_target_params_wraps_phase():
    assert bloch.TargetParams(0.3, 0.5, -math.pi / 2).phi == pytest.approx(1.5 * math.pi)
    assert bloch.TargetParams(0.3, 0.5, 5 * math.pi).phi == pytest.approx(math.pi)
    assert bloch.TargetParams(np.float64(0.3), np.int64(1), 0).k == 1.0

@pytest.mark.parametrize("r1,r2,expected", [
    ((0.1, 0.2, 0.3), (0.1, 0.2, 0.3), 0),
    ((0, 0, 1), (0, 0, -1), 2),
    ((0, 0, 1), (0, 0, 0), 1),
])
def test_trace_distance(r1, r2, expected):
    assert bloch.trace_distance(r1, r2) == pytest.approx(expected, abs=1e-15)

@given(vectors, vectors)
def test_trace_distance_is_trace_norm(r1, r2):
    assert bloch.trace_distance(r1, r2) == pytest.approx(trace_norm(density_matrix(r1) - density_matrix(r2)), abs=1e-12)

def test_bloch_vector_validation():
    v = bloch.bloch_vector([1 + 1e-10, 0, 0])
    assert v[0] == pytest.approx(1, abs=1e-15)
    assert not v.flags.writeable
    with pytest.raises(util.ValidationError, match="norm"):
        bloch.bloch_vector([1.5, 0, 0])
    with pytest.raises(util.ValidationError):
        bloch.bloch_vector([0, 0])
    with pytest.raises(util.ValidationError):
        bloch.bloch_vector([0, float("nan"), 0])
    with pytest.raises(util.ValidationError):
        bloch.bloch_vector("abc")

def test_is_pure():
    assert bloch.is_pure([0, 0.6, 0.8])
    assert not bloch.is_pure([0, 0.6, 0.7])

def test_state_set():
    s = bloch.StateSet.from_vectors([[0, 0, 1], [0.3784, 0.8012, -0.4636]], pure=[False, True])
    assert len(s) == 2
    assert s.labels == ("r1", "r2")
    assert np.linalg.norm(s[1]) == pytest.approx(1, abs=1e-15)
    assert s.pure == (True, True)
    assert s.bloch_matrix().shape == (3, 2)
    A = s.decomposition_matrix()
    npt.assert_array_equal(A[3], [1, 1])
    npt.assert_array_equal(A[:3, 0], [0, 0, 1])
    with pytest.raises(ValueError):
        s.vectors[0, 0] = 1
    sub = s.subset([1])
    assert sub.labels == ("r2",)
    npt.assert_array_equal(sub[0], s[1])

def test_state_set_invalid_states():
    with pytest.raises(util.ValidationError, match="r2"):
        bloch.StateSet.from_vectors([[0, 0, 1], [1.2, 0, 0]])
    s = bloch.StateSet.from_vectors([[0, 0, 1], [1.2, 0, 0]], allow_invalid=True)
    npt.assert_allclose(s[1], [1, 0, 0])
    with pytest.raises(util.ContractError):
        bloch.StateSet.from_vectors([])
    with pytest.raises(util.ContractError):
        bloch.StateSet.from_vectors([[0, 0, 1]], labels=["a", "b"])

def test_mix_and_check_weights():
    s = bloch.StateSet.from_vectors([[0, 0, 1], [0, 0, -1]])
    npt.assert_allclose(bloch.mix(s, [0.6, 0.4]), [0, 0, 0.2])
    with pytest.raises(util.ContractError):
        bloch.mix(s, [1.0])
    with pytest.raises(util.ValidationError):
        bloch.mix(s, [1.2, -0.2])
    with pytest.raises(util.ValidationError):
        bloch.mix(s, [0.5, 0.4])

@pytest.mark.parametrize("states,p,target,expected", [
    ([[0.1, 0.2, 0.3], [0, 0, 1]], [1, 0], [0.1, 0.2, 0.3], 0),
    ([[0, 0, 1], [0, 0, -1]], [0.6, 0.4], [0, 0, 0.2], 0),
    ([[1, 0, 0], [0, 1, 0]], [0.5, 0.5], [0, 0, 0], 0.5),
])
def test_mixture_distance_sq(states, p, target, expected):
    s = bloch.StateSet.from_vectors(states)
    assert bloch.mixture_distance_sq(target, s, p) == pytest.approx(expected, abs=1e-15)

def test_mixture_distance_sq_random(rng):
    for _ in range(100):
        n = rng.integers(1, 9)
        s = bloch.StateSet.from_vectors(random_bloch(rng, n))
        p = rng.dirichlet(np.ones(n))
        r_o = random_bloch(rng, 1)[0]
        assert bloch.mixture_distance_sq(r_o, s, p) == pytest.approx(bloch.trace_distance(r_o, bloch.mix(s, p)) ** 2, abs=1e-12)

def test_hessian():
    npt.assert_allclose(bloch.hessian(bloch.StateSet.from_vectors([[0.6, 0, 0]])), [[0.72]])
    npt.assert_array_equal(bloch.hessian(bloch.StateSet.from_vectors([[0, 0, 1], [0, 0, -1]])), [[2, -2], [-2, 2]])

def test_hessian_psd(rng):
    for _ in range(100):
        h = bloch.hessian(bloch.StateSet.from_vectors(random_bloch(rng, rng.integers(1, 11))))
        npt.assert_allclose(h, h.T)
        assert np.linalg.eigvalsh(h).min() >= -1e-12 * max(1.0, np.linalg.norm(h))
