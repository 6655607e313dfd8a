"""Closed forms for state sets made of Pauli eigenstates (+-x, +-y, +-z).

Every routine first reflects the target into the octant where all of its
Bloch components are non-negative. A reflection of axis c maps the eigenstate
(c, s) to (c, -s), so the set is relabelled rather than changed, and weights
found in the reflected frame are pulled back by matching labels. The case
formulas below are all written for that non-negative octant.
"""

import dataclasses
import itertools
import logging
import math
import numpy as np

import util
import bloch
import solver
import metrics

AXES = ("x", "y", "z")

@dataclasses.dataclass(frozen=True, order=True)
class PauliStateSpec:
    axis: str
    sign: int

    def __post_init__(self):
        if self.axis not in AXES: raise util.ValidationError(f"axis must be one of x, y, z, got {self.axis!r}")
        if self.sign not in (1, -1): raise util.ValidationError(f"eigenvalue sign must be +1 or -1, got {self.sign!r}")
        object.__setattr__(self, "sign", int(self.sign))

    @property
    def index(self): return AXES.index(self.axis)

    @property
    def label(self): return ("+" if self.sign > 0 else "-") + self.axis

    def bloch(self):
        v = np.zeros(3)
        v[self.index] = self.sign
        return v

    def reflected(self, sigma):
        return PauliStateSpec(self.axis, self.sign * int(sigma[self.index]))

    @classmethod
    def parse(cls, text):
        text = text.strip()
        if len(text) != 2 or text[0] not in "+-": raise util.ParseError(f"Pauli state must look like +x or -z, got {text!r}")
        return cls(text[1], 1 if text[0] == "+" else -1)

SIX_STATES = tuple(PauliStateSpec(axis, sign) for axis in AXES for sign in (1, -1))

def specs_to_states(specs):
    specs = list(specs)
    return bloch.StateSet.from_vectors([spec.bloch() for spec in specs], labels=[spec.label for spec in specs], pure=[True] * len(specs))

def specs_from_states(s, tol=None):
    """The Pauli eigenstate of each vector in s; ContractError if one is not a signed axis."""
    tol = util.tolerances(tol)
    specs = []
    for v, label in zip(s.vectors, s.labels):
        i = int(np.argmax(np.abs(v)))
        spec = PauliStateSpec(AXES[i], 1 if v[i] > 0 else -1)
        if np.max(np.abs(v - spec.bloch())) > tol.state: raise util.ContractError(f"state {label} is not a Pauli eigenstate")
        specs.append(spec)
    return tuple(specs)

def _target_vector(target):
    if isinstance(target, bloch.TargetParams): return np.asarray(bloch.bloch_from_params(target))
    return np.asarray(bloch.bloch_vector(target, name="target"))

@dataclasses.dataclass(frozen=True)
class PauliProblem:
    target: object # Bloch vector or TargetParams
    specs: tuple

    def __post_init__(self):
        specs = tuple(PauliStateSpec.parse(s) if isinstance(s, str) else s for s in self.specs)
        if len(set(specs)) != len(specs): raise util.ContractError("Pauli states must be distinct")
        if len(specs) not in (3, 4, 6): raise util.ContractError(f"supported Pauli sets have 3, 4 or 6 states, got {len(specs)}")
        object.__setattr__(self, "specs", specs)
        _target_vector(self.target)

    @property
    def target_bloch(self): return _target_vector(self.target)

    def states(self): return specs_to_states(self.specs)

def symmetry_reduce(t):
    """Equivalent parameters with a in [0, 1/2] and phi in [0, pi/2), using a -> 1 - a and phi -> phi - n pi/2."""
    return bloch.TargetParams(min(t.a, 1 - t.a), t.k, math.fmod(t.phi, math.pi / 2))

def _reflection(r):
    sigma = np.where(r < 0, -1.0, 1.0)
    return np.abs(r), sigma

@dataclasses.dataclass
class _Canonical:
    """Solution in the reflected frame: weights keyed by (reflected) spec."""
    weights: dict
    distance: float
    branch: solver.Branch
    case: str
    pseudo: dict | None = None
    degenerate: bool = False

def _others(*axes): return [i for i in range(3) if i not in axes]

def _case1(u, alpha, third):
    """+alpha, -alpha and third on another axis."""
    a1 = third.index
    a2, = _others(alpha, a1)
    plus, minus = PauliStateSpec(AXES[alpha], 1), PauliStateSpec(AXES[alpha], -1)
    ua, ub, uc = u[alpha], u[a1], u[a2]
    if third.sign == 1 and ua + ub <= 1:
        p2 = (1 - ua - ub) / 2
        weights = { plus: 1 - p2 - ub, minus: p2, third: ub }
        return _Canonical(weights, uc, solver.Branch.TRIPLE_INTERIOR, "case 1", pseudo=dict(weights))
    if third.sign == 1:
        p1 = (1 + ua - ub) / 2
        return _Canonical({ plus: p1, third: 1 - p1 }, math.sqrt(uc ** 2 + (ua + ub - 1) ** 2 / 2), solver.Branch.PAIR_FALLBACK, "case 1")
    p1 = (1 + ua) / 2
    return _Canonical({ plus: p1, minus: 1 - p1 }, math.hypot(ub, uc), solver.Branch.PAIR_FALLBACK, "case 1")

def _case2(u, specs, tol):
    """One eigenstate on each axis."""
    by_axis = { spec.index: spec for spec in specs }
    t = np.array([by_axis[i].sign for i in range(3)], dtype=float)
    v = t * u
    pseudo = (1 + 3 * v - v.sum()) / 3
    if np.all(pseudo >= -tol.feasibility):
        weights = { by_axis[i]: max(pseudo[i], 0.0) for i in range(3) }
        return _Canonical(weights, abs(1 - v.sum()) / math.sqrt(3), solver.Branch.TRIPLE_INTERIOR, "case 2", pseudo={ by_axis[i]: pseudo[i] for i in range(3) })
    pseudo_map = { by_axis[i]: pseudo[i] for i in range(3) }
    if np.all(t == t[0]):
        s = t[0]
        a = int(np.argmin(pseudo))
        a1, a2 = _others(a)
        p1 = (1 + s * (u[a1] - u[a2])) / 2
        distance = math.sqrt(u[a] ** 2 + (u[a1] + u[a2] - s) ** 2 / 2)
        return _Canonical({ by_axis[a1]: p1, by_axis[a2]: 1 - p1 }, distance, solver.Branch.PAIR_FALLBACK, "case 2.1", pseudo=pseudo_map)
    if np.count_nonzero(t > 0) == 1:
        a = int(np.flatnonzero(t > 0)[0])
        minus = _others(a)
        a1 = min(minus, key=lambda i: pseudo[i])
        a2, = [i for i in minus if i != a1]
        if u[a] + u[a2] <= 1:
            pa = (1 + u[a] + u[a2]) / 2
            distance = math.sqrt(u[a1] ** 2 + (u[a] - u[a2] - 1) ** 2 / 2)
            return _Canonical({ by_axis[a]: pa, by_axis[a2]: 1 - pa }, distance, solver.Branch.PAIR_FALLBACK, "case 2.2", pseudo=pseudo_map)
        distance = math.sqrt(max(0.0, 1 + float(u @ u) - 2 * u[a]))
        return _Canonical({ by_axis[a]: 1.0 }, distance, solver.Branch.PAIR_FALLBACK, "case 2.2", pseudo=pseudo_map)
    a2 = int(np.flatnonzero(t < 0)[0])
    a, a1 = _others(a2)
    pa = (1 + u[a] - u[a1]) / 2
    distance = math.sqrt(u[a2] ** 2 + (u[a] + u[a1] - 1) ** 2 / 2)
    return _Canonical({ by_axis[a]: pa, by_axis[a1]: 1 - pa }, distance, solver.Branch.PAIR_FALLBACK, "case 2.3", pseudo=pseudo_map)

def _case3(u, alpha, alpha1):
    """Both eigenstates of two axes."""
    a2, = _others(alpha, alpha1)
    plus, minus = PauliStateSpec(AXES[alpha], 1), PauliStateSpec(AXES[alpha], -1)
    plus1, minus1 = PauliStateSpec(AXES[alpha1], 1), PauliStateSpec(AXES[alpha1], -1)
    ua, ub = u[alpha], u[alpha1]
    total = ua + ub
    if total <= 1:
        # one of a one-parameter family of optimal mixtures
        p_minus1 = (1 - total) / 2
        weights = { plus: ua, minus: 0.0, minus1: p_minus1, plus1: 1 - ua - p_minus1 }
        return _Canonical(weights, u[a2], solver.Branch.TRIPLE_INTERIOR, "case 3", degenerate=True)
    p_plus = (1 + ua - ub) / 2
    return _Canonical({ plus: p_plus, plus1: 1 - p_plus }, math.sqrt(u[a2] ** 2 + (total - 1) ** 2 / 2), solver.Branch.PAIR_FALLBACK, "case 3")

def _case4(u, alpha, third, fourth, tol):
    """Both eigenstates of one axis plus one eigenstate on each other axis."""
    plus, minus = PauliStateSpec(AXES[alpha], 1), PauliStateSpec(AXES[alpha], -1)
    ua, ub, uc = u[alpha], u[third.index], u[fourth.index]
    if third.sign == 1 and fourth.sign == 1 and ua + ub + uc <= 1:
        weights = { plus: (1 + ua - ub - uc) / 2, minus: (1 - ua - ub - uc) / 2, third: ub, fourth: uc }
        return _Canonical(weights, 0.0, solver.Branch.QUAD_EXACT, "case 4", pseudo=dict(weights))
    candidates = (
        _case1(u, alpha, third),
        _case1(u, alpha, fourth),
        _case2(u, (plus, third, fourth), tol),
        _case2(u, (minus, third, fourth), tol),
    )
    best = candidates[0]
    for c in candidates[1:]:
        if c.distance < best.distance - tol.tie: best = c
    return _Canonical(best.weights, best.distance, solver.Branch.TRIPLE_FALLBACK, f"case 4 via {best.case}")

def _solve_reflected(u, specs, tol):
    """Dispatch on the shape of a reflected spec list."""
    counts = { i: [s for s in specs if s.index == i] for i in range(3) }
    pairs = [i for i in range(3) if len(counts[i]) == 2]
    singles = [counts[i][0] for i in range(3) if len(counts[i]) == 1]
    if len(specs) == 3 and len(pairs) == 1 and len(singles) == 1: return _case1(u, pairs[0], singles[0])
    if len(specs) == 3 and len(singles) == 3: return _case2(u, specs, tol)
    if len(specs) == 4 and len(pairs) == 2: return _case3(u, pairs[0], pairs[1])
    if len(specs) == 4 and len(pairs) == 1 and len(singles) == 2: return _case4(u, pairs[0], singles[0], singles[1], tol)
    raise util.ContractError(f"no closed form for Pauli set {[s.label for s in specs]}")

def _pull_back(r_o, specs, sigma, canonical, tol):
    """Map a reflected-frame solution back onto the caller's spec order."""
    p = np.array([canonical.weights.get(spec.reflected(sigma), 0.0) for spec in specs])
    pseudo = None
    if canonical.pseudo is not None: pseudo = np.array([canonical.pseudo.get(spec.reflected(sigma), 0.0) for spec in specs])
    R = np.column_stack([spec.bloch() for spec in specs])
    res = solver.make_result(r_o, R, np.maximum(p, 0), canonical.branch, tol, pseudo=pseudo, detail=canonical.case,
        degenerate=canonical.degenerate, distance=float(canonical.distance))
    metrics.solves.labels(canonical.branch.value).inc()
    logging.debug("pauli %s: %s, D=%.6g", [s.label for s in specs], canonical.case, res.distance)
    return res

def _solve_specs(target, specs, tol):
    tol = util.tolerances(tol)
    specs = tuple(PauliStateSpec.parse(s) if isinstance(s, str) else s for s in specs)
    if len(set(specs)) != len(specs): raise util.ContractError("Pauli states must be distinct")
    r_o = _target_vector(target)
    u, sigma = _reflection(r_o)
    canonical = _solve_reflected(u, [spec.reflected(sigma) for spec in specs], tol)
    return _pull_back(r_o, specs, sigma, canonical, tol)

def _axis_index(axis):
    if axis not in AXES: raise util.ContractError(f"axis must be one of x, y, z, got {axis!r}")
    return AXES.index(axis)

def solve_case1(target, axis, third, tol=None):
    """States +axis, -axis, third (an eigenstate of another axis), in that order."""
    if isinstance(third, str): third = PauliStateSpec.parse(third)
    if third.index == _axis_index(axis): raise util.ContractError("the third state must lie on a different axis")
    return _solve_specs(target, (PauliStateSpec(axis, 1), PauliStateSpec(axis, -1), third), tol)

def solve_case2(target, signs, tol=None):
    """States (x, s_x), (y, s_y), (z, s_z), in that order."""
    if len(signs) != 3: raise util.ContractError("case 2 needs one sign per axis")
    return _solve_specs(target, tuple(PauliStateSpec(axis, s) for axis, s in zip(AXES, signs)), tol)

def solve_case3(target, axis, axis_prime, tol=None):
    """States +axis, -axis, +axis', -axis', in that order."""
    if _axis_index(axis) == _axis_index(axis_prime): raise util.ContractError("case 3 needs two different axes")
    return _solve_specs(target, (PauliStateSpec(axis, 1), PauliStateSpec(axis, -1), PauliStateSpec(axis_prime, 1), PauliStateSpec(axis_prime, -1)), tol)

def solve_case4(target, axis, third, fourth, tol=None):
    """States +axis, -axis, third, fourth, with third and fourth on the two remaining axes."""
    third, fourth = (PauliStateSpec.parse(s) if isinstance(s, str) else s for s in (third, fourth))
    if len({ _axis_index(axis), third.index, fourth.index }) != 3: raise util.ContractError("case 4 needs the three states' axes to be distinct")
    return _solve_specs(target, (PauliStateSpec(axis, 1), PauliStateSpec(axis, -1), third, fourth), tol)

def _six_state(target, specs, tol):
    tol = util.tolerances(tol)
    specs = tuple(PauliStateSpec.parse(s) if isinstance(s, str) else s for s in specs)
    if set(specs) != set(SIX_STATES): raise util.ContractError("a six-state set must contain every Pauli eigenstate once")
    r_o = _target_vector(target)
    u, sigma = _reflection(r_o)
    best = None
    for idx in itertools.combinations(range(6), 4):
        c = _solve_reflected(u, [specs[i].reflected(sigma) for i in idx], tol)
        if best is None or c.distance < best[0].distance - tol.tie: best = (c, idx)
    c, idx = best
    labels = ",".join(specs[i].label for i in idx)
    chosen = _Canonical(c.weights, c.distance, solver.Branch.SUBSET_ENUM, f"{c.case} on {labels}", degenerate=c.degenerate)
    return _pull_back(r_o, specs, sigma, chosen, tol)

def six_state_solution(target, tol=None):
    """All six eigenstates, ordered +x, -x, +y, -y, +z, -z: the best of the four-state closed forms."""
    return _six_state(target, SIX_STATES, tol)

def solve_pauli(problem, tol=None):
    """Closed-form solution for any supported PauliProblem, weights in the problem's own order."""
    if len(problem.specs) == 6: return _six_state(problem.target, problem.specs, tol)
    return _solve_specs(problem.target, problem.specs, tol)
