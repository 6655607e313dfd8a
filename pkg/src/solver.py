"""Closed-form closest mixtures for two, three and four states, and the rank-R
subset enumeration that reduces any larger set to those cases."""

import dataclasses
import enum
import itertools
import logging
import math
import numpy as np

import util
import bloch
import metrics

class Branch(enum.Enum):
    SINGLE = "Single"
    INTERIOR = "Interior"
    CLAMP_LOW = "ClampLow"
    CLAMP_HIGH = "ClampHigh"
    TRIPLE_INTERIOR = "TripleInterior"
    PAIR_FALLBACK = "PairFallback"
    QUAD_EXACT = "QuadExact"
    TRIPLE_FALLBACK = "TripleFallback"
    SUBSET_ENUM = "SubsetEnum"
    ORACLE = "Oracle"

@dataclasses.dataclass(frozen=True, eq=False)
class KKTDiagnostics:
    """Multipliers of the simplex-constrained problem, reconstructed from the gradient at the returned weights.

    lambda_ is the equality multiplier and lambda_i the bound multipliers, with
    grad_i - lambda_i + lambda_ = 0 holding by construction. The stationarity
    residual is how far some lambda_i falls below zero; complementarity is max |lambda_i p_i|.
    """
    lambda_: float
    lambda_i: np.ndarray
    stationarity_residual: float
    complementarity_residual: float
    degenerate_weights: bool = False

    def to_dict(self):
        return {
            "lambda": self.lambda_,
            "lambda_i": self.lambda_i.tolist(),
            "stationarity_residual": self.stationarity_residual,
            "complementarity_residual": self.complementarity_residual,
            "degenerate_weights": self.degenerate_weights
        }

@dataclasses.dataclass(frozen=True, eq=False)
class ApproximationResult:
    weights: np.ndarray
    distance: float
    support: tuple
    branch: Branch
    diagnostics: KKTDiagnostics
    pseudo_probabilities: np.ndarray | None = None
    detail: str = ""

    def to_dict(self):
        return {
            "weights": self.weights.tolist(),
            "distance": self.distance,
            "support": list(self.support),
            "branch": self.branch.value,
            "pseudo_probabilities": None if self.pseudo_probabilities is None else self.pseudo_probabilities.tolist(),
            "detail": self.detail,
            "diagnostics": self.diagnostics.to_dict()
        }

def kkt_multipliers(r_o, R, p, degenerate=False):
    grad = 2 * R.T @ (R @ p - r_o)
    lam = -float(p @ grad)
    lam_i = grad + lam
    return KKTDiagnostics(
        lambda_=lam,
        lambda_i=lam_i,
        stationarity_residual=max(0.0, -float(lam_i.min())),
        complementarity_residual=float(np.abs(lam_i * p).max()),
        degenerate_weights=degenerate
    )

def kkt_residual(res, r_o, s):
    r_o = bloch.bloch_vector(r_o, name="target")
    if res.weights.shape != (len(s),): raise util.ContractError(f"result has {res.weights.size} weights for a set of {len(s)} states")
    return kkt_multipliers(r_o, s.bloch_matrix(), res.weights, res.diagnostics.degenerate_weights)

def clean_weights(p, tol):
    p = np.where(p <= tol.support, 0.0, p)
    return p / p.sum()

def make_result(r_o, R, p, branch, tol, pseudo=None, detail="", degenerate=False, distance=None):
    """Package weights over the columns of R. distance defaults to the one realized by the weights."""
    p = clean_weights(np.asarray(p, dtype=float), tol)
    if distance is None: distance = float(np.linalg.norm(r_o - R @ p))
    return ApproximationResult(
        weights=p,
        distance=distance,
        support=tuple(int(i) for i in np.flatnonzero(p)),
        branch=branch,
        diagnostics=kkt_multipliers(r_o, R, p, degenerate),
        pseudo_probabilities=None if pseudo is None else np.asarray(pseudo, dtype=float),
        detail=detail
    )

def _distance(r_o, R, p): return float(np.linalg.norm(r_o - R @ p))

# kernels below take raw arrays (target r_o, columns of R) and return (weights, branch, pseudo-probabilities)

def _single(r_o, R, tol):
    return np.array([1.0]), Branch.SINGLE, None

def _pair(r_o, R, tol):
    r1, r2 = R[:, 0], R[:, 1]
    edge = r1 - r2
    h = float(edge @ edge)
    if h <= tol.coincidence: return np.array([1.0, 0.0]), Branch.CLAMP_HIGH, None
    g = float((r_o - r2) @ edge)
    if g < 0: return np.array([0.0, 1.0]), Branch.CLAMP_LOW, None
    if g > h: return np.array([1.0, 0.0]), Branch.CLAMP_HIGH, None
    p1 = g / h
    return np.array([p1, 1 - p1]), Branch.INTERIOR, None

def _best_over(r_o, R, size, kernel, tol):
    """Lexicographically first subset of the columns of R minimizing the distance, within tol.tie."""
    n = R.shape[1]
    best = None
    for idx in itertools.combinations(range(n), size):
        p_sub, _, _ = kernel(r_o, R[:, idx], tol)
        p = np.zeros(n)
        p[list(idx)] = p_sub
        d = _distance(r_o, R, p)
        if best is None or d < best[0] - tol.tie: best = (d, p, idx)
    return best

def triple_determinant(R):
    r1, r2, r3 = R.T
    e1, e3 = r1 - r2, r3 - r2
    h1, h3 = float(e1 @ e1), float(e3 @ e3)
    return h1 * h3 - float(e1 @ e3) ** 2, h1 * h3

def _triple(r_o, R, tol):
    d, scale = triple_determinant(R)
    if abs(d) <= tol.degeneracy * max(1.0, scale):
        logging.debug("collinear triple (d=%.3g), falling back to pairs", d)
        _, p, _ = _best_over(r_o, R, 2, _pair, tol)
        return p, Branch.PAIR_FALLBACK, None
    r3 = R[:, 2]
    e13, e23 = R[:, 0] - r3, R[:, 1] - r3
    system = np.vstack([R.T @ e13, R.T @ e23, np.ones(3)])
    rhs = np.array([r_o @ e13, r_o @ e23, 1.0])
    pseudo = np.linalg.solve(system, rhs)
    if np.all(pseudo >= -tol.feasibility) and np.all(pseudo <= 1 + tol.feasibility):
        p = np.clip(pseudo, 0, 1)
        return p / p.sum(), Branch.TRIPLE_INTERIOR, pseudo
    _, p, _ = _best_over(r_o, R, 2, _pair, tol)
    return p, Branch.PAIR_FALLBACK, pseudo

def explicit_pseudo_probabilities(r_o, r1, r2, r3):
    """Pseudo-probabilities of a triple from the explicit determinant formulas, for cross-checking the linear solve."""
    r_o, r1, r2, r3 = (np.asarray(v, dtype=float) for v in (r_o, r1, r2, r3))
    a, b, c = r1 - r2, r2 - r3, r_o - r2
    e, f = r1 - r3, r_o - r1
    d, _ = triple_determinant(np.column_stack([r1, r2, r3]))
    p1 = ((a @ c) * (b @ b) - (a @ b) * (c @ b)) / d
    p2 = ((a @ e) * (f @ e) - (a @ f) * (e @ e)) / d
    return np.array([p1, p2, 1 - p1 - p2])

def matrix_rank(A, tol=None):
    """Number of singular values above tol times the largest. tol is a relative threshold or a Tolerances (its rank field)."""
    if tol is None or isinstance(tol, util.Tolerances): tol = util.tolerances(tol).rank
    sv = np.linalg.svd(np.asarray(A, dtype=float), compute_uv=False)
    if sv.size == 0 or sv[0] == 0: return 0
    return int(np.count_nonzero(sv > tol * sv[0]))

def _augmented(R): return np.vstack([R, np.ones(R.shape[1])])

def _quad(r_o, R, tol):
    A = _augmented(R)
    if matrix_rank(A, tol) < 4: raise util.ContractError("decomposition matrix of the four states is rank deficient; use solve() instead")
    pseudo = np.linalg.solve(A, np.append(r_o, 1.0))
    if np.all(pseudo >= -tol.feasibility) and np.all(pseudo <= 1 + tol.feasibility):
        p = np.clip(pseudo, 0, 1)
        return p / p.sum(), Branch.QUAD_EXACT, pseudo
    _, p, _ = _best_over(r_o, R, 3, _triple, tol)
    return p, Branch.TRIPLE_FALLBACK, pseudo

kernels = { 1: _single, 2: _pair, 3: _triple, 4: _quad }

def _target(r_o, tol): return np.asarray(bloch.bloch_vector(r_o, tol, name="target"))

def _columns(states, tol, expected):
    if isinstance(states, bloch.StateSet): s = states
    else: s = bloch.StateSet.from_vectors(states, tol=tol)
    if len(s) != expected: raise util.ContractError(f"expected {expected} states, got {len(s)}")
    return s.bloch_matrix()

def _finish(r_o, R, kernel, tol, detail=""):
    p, branch, pseudo = kernel(r_o, R, tol)
    res = make_result(r_o, R, p, branch, tol, pseudo, detail)
    metrics.solves.labels(branch.value).inc()
    return res

def solve_single(r_o, r1, tol=None):
    tol = util.tolerances(tol)
    return _finish(_target(r_o, tol), _columns([r1], tol, 1), _single, tol)

def solve_pair(r_o, r1, r2, tol=None):
    tol = util.tolerances(tol)
    return _finish(_target(r_o, tol), _columns([r1, r2], tol, 2), _pair, tol)

def solve_orthonormal_pair(r_o, r1, r2, tol=None):
    """Closest mixture of two antipodal pure states: D^2 = |r_o|^2 - (r_o . r1)^2, p_i = (1 + r_o . r_i) / 2."""
    tol = util.tolerances(tol)
    r_o = _target(r_o, tol)
    R = _columns([r1, r2], tol, 2)
    r1, r2 = R[:, 0], R[:, 1]
    if abs(float(r1 @ r2) + 1) > tol.orthonormal: raise util.ContractError(f"states are not antipodal pure states (r1 . r2 = {float(r1 @ r2):.12g})")
    proj = float(r_o @ r1)
    p = np.array([(1 + proj) / 2, (1 - proj) / 2])
    distance = math.sqrt(max(0.0, float(r_o @ r_o) - proj * proj))
    branch = Branch.INTERIOR if 0 < p[0] < 1 else (Branch.CLAMP_HIGH if p[0] >= 1 else Branch.CLAMP_LOW)
    res = make_result(r_o, R, p, branch, tol, detail="orthonormal pair", distance=distance)
    metrics.solves.labels(branch.value).inc()
    return res

def solve_triple(r_o, r1, r2, r3, tol=None):
    tol = util.tolerances(tol)
    return _finish(_target(r_o, tol), _columns([r1, r2, r3], tol, 3), _triple, tol)

def solve_quad_full_rank(r_o, s, tol=None):
    tol = util.tolerances(tol)
    return _finish(_target(r_o, tol), _columns(s, tol, 4), _quad, tol)

def _subset_kernel(R, size, tol):
    """kernel for a subset of the given size, or None if the subset can be skipped."""
    if size < 4: return kernels[size]
    if matrix_rank(_augmented(R), tol) < 4: return None
    return _quad

def solve(r_o, s, tol=None):
    """Closest mixture of the states in s to r_o, in trace distance.

    Up to four states are handled by the closed forms directly. Otherwise every
    subset of R = rank(A) states is solved in closed form and the best one is
    kept, ties going to the lexicographically smallest index tuple.
    """
    tol = util.tolerances(tol)
    r_o = _target(r_o, tol)
    if not isinstance(s, bloch.StateSet): s = bloch.StateSet.from_vectors(s, tol=tol)
    n = len(s)
    if n == 0: raise util.ContractError("cannot approximate with an empty state set")
    R = s.bloch_matrix()
    if n <= 3: return _finish(r_o, R, kernels[n], tol)
    rank = matrix_rank(s.decomposition_matrix(), tol)
    if n == 4 and rank == 4: return _finish(r_o, R, _quad, tol)
    members = np.flatnonzero(np.linalg.norm(s.vectors - r_o, axis=1) <= tol.support)
    if members.size:
        p = np.zeros(n)
        p[members[0]] = 1.0
        res = make_result(r_o, R, p, Branch.SINGLE, tol, detail=f"target is state {int(members[0])}")
        metrics.solves.labels(Branch.SINGLE.value).inc()
        return res
    size = rank
    while size >= 1:
        best = None
        for idx in itertools.combinations(range(n), size):
            sub = R[:, idx]
            kernel = _subset_kernel(sub, size, tol)
            if kernel is None: continue
            p_sub, branch, _ = kernel(r_o, sub, tol)
            d = _distance(r_o, sub, p_sub)
            if best is None or d < best[0] - tol.tie: best = (d, idx, p_sub, branch)
        if best is not None: break
        # every R-subset was affinely degenerate
        logging.debug("no affinely independent %d-subset, trying %d-subsets", size, size - 1)
        size -= 1
    _, idx, p_sub, branch = best
    p = np.zeros(n)
    p[list(idx)] = p_sub
    logging.debug("best subset %s via %s", idx, branch.value)
    res = make_result(r_o, R, p, Branch.SUBSET_ENUM, tol, detail=f"subset {list(idx)} ({branch.value})")
    metrics.solves.labels(Branch.SUBSET_ENUM.value).inc()
    return res
