"""Qubit states as Bloch vectors.

Everything here is Bloch-space: a state is a real 3-vector r with |r| <= 1,
and the trace distance between two qubit states is |r1 - r2|.
"""

import dataclasses
import numbers
import math
import logging
import numpy as np

import util

def _as_vector(r, name="state"):
    try: v = np.array(r, dtype=float)
    except (TypeError, ValueError): raise util.ValidationError(f"{name} is not a numeric 3-vector: {r!r}")
    if v.shape != (3,): raise util.ValidationError(f"{name} must have 3 components, got shape {v.shape}")
    if not np.all(np.isfinite(v)): raise util.ValidationError(f"{name} has non-finite components: {r!r}")
    return v

def _frozen(v):
    v.flags.writeable = False
    return v

def bloch_vector(r, tol=None, name="state"):
    """Validated read-only copy of r. Norms within tol.state above 1 are pulled back onto the sphere."""
    tol = util.tolerances(tol)
    v = _as_vector(r, name)
    norm_sq = float(v @ v)
    if norm_sq > 1 + tol.state: raise util.ValidationError(f"{name} has Bloch norm {math.sqrt(norm_sq):.6g} > 1")
    if norm_sq > 1: v /= math.sqrt(norm_sq)
    return _frozen(v)

def is_pure(r, tol=None):
    tol = util.tolerances(tol)
    r = np.asarray(r, dtype=float)
    return abs(float(r @ r) - 1) <= tol.state

@dataclasses.dataclass(frozen=True)
class TargetParams:
    """rho = [[1-a, k sqrt(a(1-a)) e^{-i phi}], [k sqrt(a(1-a)) e^{i phi}, a]]"""
    a: float
    k: float
    phi: float

    def __post_init__(self):
        for name in ("a", "k"):
            x = getattr(self, name)
            if isinstance(x, bool) or not isinstance(x, numbers.Real) or not math.isfinite(x): raise util.ValidationError(f"{name} must be a finite number, got {x!r}")
            if not 0 <= x <= 1: raise util.ValidationError(f"{name} must lie in [0, 1], got {x!r}")
            object.__setattr__(self, name, float(x))
        if isinstance(self.phi, bool) or not isinstance(self.phi, numbers.Real) or not math.isfinite(self.phi):
            raise util.ValidationError(f"phi must be a finite number, got {self.phi!r}")
        phi = math.fmod(float(self.phi), 2 * math.pi)
        if phi < 0: phi += 2 * math.pi
        # fmod of a tiny negative can land exactly on 2pi
        if phi >= 2 * math.pi: phi = 0.0
        object.__setattr__(self, "phi", phi)

def bloch_from_params(t):
    c = 2 * t.k * math.sqrt(t.a * (1 - t.a))
    return _frozen(np.array([c * math.cos(t.phi), c * math.sin(t.phi), 1 - 2 * t.a]))

def params_from_bloch(r):
    """Inverse of bloch_from_params. k and phi are set to 0 where they are not identifiable."""
    r = bloch_vector(r)
    a = (1 - r[2]) / 2
    a = min(max(a, 0.0), 1.0)
    modulus = math.hypot(r[0], r[1])
    scale = 2 * math.sqrt(a * (1 - a))
    if scale == 0 or modulus == 0: return TargetParams(a, 0.0, 0.0)
    return TargetParams(a, min(modulus / scale, 1.0), math.atan2(r[1], r[0]))

@dataclasses.dataclass(frozen=True, eq=False)
class StateSet:
    vectors: np.ndarray # N x 3, read-only
    labels: tuple
    pure: tuple

    @classmethod
    def from_vectors(cls, vectors, labels=None, pure=None, tol=None, allow_invalid=False):
        """Build a set from raw Bloch vectors.

        pure marks states the caller declares to be pure: if their norm is within
        tol.fixture_rounding of 1 they are snapped onto the sphere. States with norm
        above 1 are rejected unless allow_invalid is set, in which case they are
        renormalized with a warning.
        """
        tol = util.tolerances(tol)
        raw = list(vectors)
        if not raw: raise util.ContractError("a state set needs at least one state")
        n = len(raw)
        labels = tuple(str(l) for l in labels) if labels is not None else tuple(f"r{i + 1}" for i in range(n))
        declared = tuple(bool(p) for p in pure) if pure is not None else (False,) * n
        if len(labels) != n or len(declared) != n: raise util.ContractError("labels and pure flags must match the number of states")
        out = np.empty((n, 3))
        for i, (r, label, flagged) in enumerate(zip(raw, labels, declared)):
            v = _as_vector(r, label)
            norm = math.sqrt(float(v @ v))
            if flagged and norm > 0 and abs(norm - 1) <= tol.fixture_rounding:
                if abs(norm * norm - 1) > tol.state: logging.debug("snapping pure state %s (norm %.6f) onto the sphere", label, norm)
                v /= norm
            elif norm * norm > 1 + tol.state:
                if not allow_invalid: raise util.ValidationError(f"state {label} has Bloch norm {norm:.6g} > 1")
                logging.warning("state %s has Bloch norm %.6g > 1, renormalizing to the unit sphere", label, norm)
                v /= norm
            elif norm > 1:
                v /= norm
            elif flagged:
                logging.warning("state %s is declared pure but has Bloch norm %.6g", label, norm)
            out[i] = v
        return cls(_frozen(out), labels, tuple(is_pure(v, tol) for v in out))

    def __len__(self): return self.vectors.shape[0]

    def __getitem__(self, i): return self.vectors[i]

    def bloch_matrix(self):
        """3 x N, one column per state."""
        return self.vectors.T

    def decomposition_matrix(self):
        """4 x N: Bloch components A_ij = Tr(sigma_i rho_j) with an all-ones fourth row."""
        return np.vstack([self.vectors.T, np.ones(len(self))])

    def subset(self, indices):
        indices = list(indices)
        return StateSet(_frozen(self.vectors[indices].copy()), tuple(self.labels[i] for i in indices), tuple(self.pure[i] for i in indices))

def trace_distance(r1, r2):
    r1, r2 = bloch_vector(r1, name="r1"), bloch_vector(r2, name="r2")
    return float(np.linalg.norm(r1 - r2))

def check_weights(p, n, tol=None):
    """Weights as a fresh float array, after checking they form a probability vector of length n."""
    tol = util.tolerances(tol)
    p = np.array(p, dtype=float).reshape(-1)
    if p.shape != (n,): raise util.ContractError(f"expected {n} weights, got {p.size}")
    if not np.all(np.isfinite(p)): raise util.ValidationError("weights must be finite")
    if p.min() < -tol.support: raise util.ValidationError(f"weights must be non-negative, got min {p.min():.6g}")
    if abs(p.sum() - 1) > tol.weight_sum: raise util.ValidationError(f"weights must sum to 1, got {p.sum():.17g}")
    return np.maximum(p, 0)

def mix(s, p, tol=None):
    """Bloch vector of sum_i p_i rho_i."""
    p = check_weights(p, len(s), tol)
    return s.bloch_matrix() @ p

def mixture_distance_sq(r_o, s, p, tol=None):
    r_o = bloch_vector(r_o, tol, name="target")
    diff = r_o - mix(s, p, tol)
    return float(diff @ diff)

def hessian(s):
    """Hessian of the squared mixture distance in p: 2 R^T R."""
    R = s.bloch_matrix()
    return 2 * R.T @ R
