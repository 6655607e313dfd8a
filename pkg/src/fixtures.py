import os.path
import logging
import numpy as np
import toml

import util
import bloch
import pauli

fixtures_path = os.path.join(os.path.dirname(__file__), "data/fixtures.toml")

_data = None
def _load():
    global _data
    if _data is None:
        with open(fixtures_path, "r") as f: _data = toml.load(f)
    return _data

def fixture_names():
    return [ name for name in _load() if name != "figures" ]

def figure_names():
    return list(_load().get("figures", {}))

def amplitudes_to_bloch(alpha, beta):
    """Bloch vector of the pure state alpha|0> + beta|1>, normalized first."""
    psi = np.array([alpha, beta], dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0: raise util.ValidationError("state vector is zero")
    alpha, beta = psi / norm
    overlap = np.conj(alpha) * beta
    return np.array([2 * overlap.real, 2 * overlap.imag, abs(alpha) ** 2 - abs(beta) ** 2])

def fixture(name, allow_invalid_states=False, tol=None):
    data = _load()
    if name == "figures" or name not in data: raise util.ValidationError(f"unknown fixture {name!r}; known: {', '.join(fixture_names())}")
    entry = data[name]
    if "specs" in entry: return pauli.specs_to_states(pauli.PauliStateSpec.parse(s) for s in entry["specs"])
    if "amplitudes" in entry:
        vectors = [ amplitudes_to_bloch(complex(*a), complex(*b)) for a, b in entry["amplitudes"] ]
        return bloch.StateSet.from_vectors(vectors, pure=[True] * len(vectors), tol=tol)
    logging.debug("loading fixture %s (%s)", name, entry.get("description", ""))
    return bloch.StateSet.from_vectors(entry["states"], pure=entry.get("pure"), tol=tol, allow_invalid=allow_invalid_states)

def figure_setup(name):
    """The sweep plotted for a fixture: swept parameter, range, the parameter varied between curves and its values, fixed values."""
    figures = _load().get("figures", {})
    if name not in figures: raise util.ValidationError(f"no figure setup for {name!r}; known: {', '.join(figures)}")
    setup = dict(figures[name])
    setup["range"] = tuple(util.parse_phi(x) for x in setup["range"])
    setup["values"] = [ util.parse_phi(x) for x in setup["values"] ]
    setup["fixed"] = { k: util.parse_phi(v) for k, v in setup.get("fixed", {}).items() }
    return setup

def description(name):
    data = _load()
    if name == "figures" or name not in data: raise util.ValidationError(f"unknown fixture {name!r}")
    return data[name].get("description", "")
