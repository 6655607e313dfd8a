"""Numerical minimization of |r_o - R p|^2 over the probability simplex.

This shares no algebra with the closed forms in solver.py and is what they are
checked against: projected gradient descent (fixed step 1/L or backtracking)
with a periodic active-set pass over the face the iterate lies on, and, for up
to three states, an exhaustive grid with zoom refinement.
"""

import dataclasses
import logging
import math
import numpy as np
import scipy.linalg

import util
import bloch
import solver
import metrics

STEP_RULES = ("fixed", "backtracking")

@dataclasses.dataclass(frozen=True)
class OracleConfig:
    max_iterations: int = 100000
    step_rule: str = "fixed"
    convergence_tol: float = 1e-12 # on successive objective change
    gap_tol: float = 1e-9 # on the distance error certified by the Frank-Wolfe gap
    polish_every: int = 100 # iterations between active-set passes, 0 disables them
    grid_resolution: int = 2000
    grid_refinements: int = 4

    def __post_init__(self):
        for name in ("max_iterations", "grid_resolution"):
            x = getattr(self, name)
            if isinstance(x, bool) or not isinstance(x, int) or x <= 0: raise util.ValidationError(f"oracle {name} must be a positive integer, got {x!r}")
        for name in ("grid_refinements", "polish_every"):
            x = getattr(self, name)
            if isinstance(x, bool) or not isinstance(x, int) or x < 0: raise util.ValidationError(f"oracle {name} must be a non-negative integer, got {x!r}")
        for name in ("convergence_tol", "gap_tol"):
            x = getattr(self, name)
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not x > 0: raise util.ValidationError(f"oracle {name} must be positive, got {x!r}")
        if self.step_rule not in STEP_RULES: raise util.ValidationError(f"oracle step_rule must be one of {', '.join(STEP_RULES)}, got {self.step_rule!r}")

    @classmethod
    def from_config(cls, overrides=None):
        values = dict(util.config.get("oracle", {}))
        values.update(overrides or {})
        known = { f.name for f in dataclasses.fields(cls) }
        unknown = sorted(set(values) - known)
        if unknown: raise util.ValidationError(f"unknown oracle setting(s): {', '.join(unknown)}")
        return cls(**values)

def objective(r_o, R, p):
    diff = r_o - R @ p
    return float(diff @ diff)

def objective_gradient(r_o, R, p):
    """Gradient of |r_o - R p|^2 in p, i.e. H p - 2 R^T r_o with H = 2 R^T R."""
    return 2 * R.T @ (R @ p - r_o)

def simplex_project(v):
    """Euclidean projection onto {p : p >= 0, sum p = 1} by sorting and thresholding."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size == 0 or not np.all(np.isfinite(v)): raise util.ValidationError("can only project a non-empty finite vector")
    u = np.sort(v)[::-1]
    cumsum = np.cumsum(u)
    j = np.arange(1, v.size + 1)
    rho = np.flatnonzero(u + (1 - cumsum) / j > 0)[-1]
    theta = (1 - cumsum[rho]) / (rho + 1)
    return np.maximum(v + theta, 0)

def frank_wolfe_gap(grad, p):
    """max over simplex vertices e of grad . (p - e); bounds f(p) - min f from above for convex f."""
    return float(p @ grad - grad.min())

def distance_error_bound(f, gap):
    """Bound on sqrt(f) - sqrt(f*) given f - f* <= gap and f* >= 0."""
    d = math.sqrt(f)
    if d == 0: return 0.0
    return min(d, gap / d)

def polish_face(r_o, R, p, tol=None):
    """Active-set pass started from the face of the simplex that p lies on.

    Each round moves p by the least-norm step to a minimizer over the affine
    hull of the current support. If that step leaves the simplex, p stops at the
    boundary and the weight that reached zero leaves the support; otherwise the
    state with the most negative gradient entry joins it. The objective never
    increases along the way.
    """
    tol = util.tolerances(tol)
    p = np.array(p, dtype=float)
    support = p > 0
    for _ in range(3 * p.size + 3):
        idx = np.flatnonzero(support)
        if idx.size > 1:
            basis = scipy.linalg.null_space(np.ones((1, idx.size)))
            z = scipy.linalg.lstsq(R[:, idx] @ basis, r_o - R @ p)[0]
            step = basis @ z
            shrinking = step < 0
            ratios = np.full(idx.size, np.inf)
            ratios[shrinking] = p[idx[shrinking]] / -step[shrinking]
            i = int(np.argmin(ratios))
            if ratios[i] < 1:
                p[idx] = np.maximum(p[idx] + ratios[i] * step, 0)
                p[idx[i]] = 0.0
                support[idx[i]] = False
                continue
            p[idx] = np.maximum(p[idx] + step, 0)
        outside = np.flatnonzero(~support)
        if outside.size == 0: break
        grad = objective_gradient(r_o, R, p)
        j = outside[int(np.argmin(grad[outside]))]
        # at a face minimizer the gradient is constant on the support
        if grad[j] >= grad[idx].mean() - tol.degeneracy * max(1.0, float(np.abs(grad).max())): break
        support[j] = True
    return p / p.sum()

def _resolve(r_o, s, cfg, tol):
    tol = util.tolerances(tol)
    cfg = cfg or OracleConfig.from_config()
    r_o = np.asarray(bloch.bloch_vector(r_o, tol, name="target"))
    if not isinstance(s, bloch.StateSet): s = bloch.StateSet.from_vectors(s, tol=tol)
    return r_o, s, cfg, tol

def oracle_solve(r_o, s, cfg=None, tol=None, history=None):
    """Projected gradient descent from the uniform mixture.

    Stops once the objective change is within cfg.convergence_tol and the
    distance error certified by the Frank-Wolfe gap (see distance_error_bound)
    is within cfg.gap_tol.
    Every cfg.polish_every iterations the iterate is replaced by the result of
    polish_face when that lowers the objective.
    If history is a list, the objective at every iterate is appended to it.
    """
    r_o, s, cfg, tol = _resolve(r_o, s, cfg, tol)
    metrics.oracle_runs.labels("gradient").inc()
    R = s.bloch_matrix()
    n = len(s)
    p = np.full(n, 1.0 / n)
    f = objective(r_o, R, p)
    if history is not None: history.append(f)
    L = float(scipy.linalg.eigvalsh(bloch.hessian(s))[-1])
    if L <= 0:
        # every state is the maximally mixed state; the objective is constant
        return solver.make_result(r_o, R, p, solver.Branch.ORACLE, tol, detail="0 iterations")
    step = 1.0 / L
    for iteration in range(1, cfg.max_iterations + 1):
        grad = objective_gradient(r_o, R, p)
        if cfg.step_rule == "fixed":
            candidate = simplex_project(p - step * grad)
            f_new = objective(r_o, R, candidate)
        else:
            step = min(2 * step, 1e6 / L)
            while True:
                candidate = simplex_project(p - step * grad)
                delta = candidate - p
                f_new = objective(r_o, R, candidate)
                if f_new <= f + grad @ delta + (delta @ delta) / (2 * step) or step <= 1e-3 / L: break
                step /= 2
        change = abs(f - f_new)
        p, f = candidate, f_new
        if history is not None: history.append(f)
        if change <= cfg.convergence_tol and distance_error_bound(f, frank_wolfe_gap(objective_gradient(r_o, R, p), p)) <= cfg.gap_tol:
            metrics.oracle_iterations.inc(iteration)
            logging.debug("oracle converged in %d iterations (f=%.3g)", iteration, f)
            return solver.make_result(r_o, R, p, solver.Branch.ORACLE, tol, detail=f"{iteration} iterations")
        if cfg.polish_every and iteration % cfg.polish_every == 0:
            q = polish_face(r_o, R, p, tol)
            f_q = objective(r_o, R, q)
            if f_q < f:
                p, f = q, f_q
                if history is not None: history.append(f)
    metrics.oracle_iterations.inc(cfg.max_iterations)
    metrics.oracle_failures.inc()
    gap = frank_wolfe_gap(objective_gradient(r_o, R, p), p)
    raise util.ConvergenceError(f"oracle did not converge in {cfg.max_iterations} iterations (objective {f:.6g}, gap {gap:.3g})", iterations=cfg.max_iterations)

def _grid_points(n, lo, hi, resolution):
    """Candidate weight vectors on a grid over the first n-1 coordinates, restricted to the simplex."""
    axes = [np.linspace(l, h, resolution + 1) for l, h in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    head = np.stack([m.reshape(-1) for m in mesh], axis=1)
    last = 1 - head.sum(axis=1)
    keep = np.all(head >= 0, axis=1) & (last >= 0)
    return np.column_stack([head[keep], last[keep]])

def oracle_grid(r_o, s, cfg=None, tol=None):
    """Exhaustive grid search for up to three states, zooming in around the best point cfg.grid_refinements times."""
    r_o, s, cfg, tol = _resolve(r_o, s, cfg, tol)
    n = len(s)
    if n > 3: raise util.ContractError(f"grid mode supports at most 3 states, got {n}")
    metrics.oracle_runs.labels("grid").inc()
    R = s.bloch_matrix()
    if n == 1: return solver.make_result(r_o, R, np.ones(1), solver.Branch.ORACLE, tol, detail="grid")
    resolution = cfg.grid_resolution if n == 2 else min(cfg.grid_resolution, 500)
    lo, hi = np.zeros(n - 1), np.ones(n - 1)
    best_p, best_f = None, np.inf
    for level in range(cfg.grid_refinements + 1):
        points = _grid_points(n, lo, hi, resolution)
        if best_p is not None: points = np.vstack([points, best_p])
        diffs = r_o[None, :] - points @ R.T
        values = np.einsum("ij,ij->i", diffs, diffs)
        i = int(np.argmin(values))
        if values[i] < best_f: best_p, best_f = points[i], float(values[i])
        cell = (hi - lo) / resolution
        lo = np.maximum(best_p[:-1] - cell, 0)
        hi = np.minimum(best_p[:-1] + cell, 1)
    return solver.make_result(r_o, R, best_p, solver.Branch.ORACLE, tol, detail=f"grid {resolution}x{cfg.grid_refinements}")
