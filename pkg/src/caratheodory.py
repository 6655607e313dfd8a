import dataclasses
import logging
import numpy as np
import scipy.linalg

import util
import bloch
import solver
import metrics

MIXTURE_TOLERANCE = 1e-10

@dataclasses.dataclass(frozen=True, eq=False)
class Decomposition:
    states: bloch.StateSet
    weights: np.ndarray
    mixed_bloch: np.ndarray # cached sum_i p_i r_i

    @classmethod
    def of(cls, states, weights, tol=None):
        weights = bloch.check_weights(weights, len(states), tol)
        mixed = states.bloch_matrix() @ weights
        if float(mixed @ mixed) > 1 + util.tolerances(tol).state: raise util.ValidationError("mixture lies outside the Bloch ball")
        return cls(states, weights, mixed)

    @property
    def support(self): return tuple(int(i) for i in np.flatnonzero(self.weights))

    def residual(self):
        return float(np.linalg.norm(self.states.bloch_matrix() @ self.weights - self.mixed_bloch))

def _kernel_vector(A, tol):
    """A null vector of A (more columns than rank), sign-fixed so its largest-magnitude entry is positive."""
    _, sv, vh = scipy.linalg.svd(A)
    rank = int(np.count_nonzero(sv > tol.rank * sv[0])) if sv.size else 0
    k = vh[rank]
    if k[np.argmax(np.abs(k))] < 0: k = -k
    return k

def reduce(d, tol=None):
    """Rewrite a decomposition over at most as many states as the rank of its weighted columns of A, keeping the mixture fixed.

    Each step takes a vector k with sum_i k_i [r_i; 1] = 0 over the current
    support and moves to p - alpha k with alpha = min p_i / k_i over k_i > 0,
    which zeroes at least one weight.
    """
    tol = util.tolerances(tol)
    if d.residual() > 1e-12: raise util.ContractError(f"cached mixture disagrees with the weights by {d.residual():.3g}")
    A = d.states.decomposition_matrix()
    p = np.where(d.weights <= tol.support, 0.0, d.weights)
    # states without weight must not set the scale of the rank test
    rank = solver.matrix_rank(A[:, p > 0], tol)
    target = d.mixed_bloch
    steps = 0
    while True:
        support = np.flatnonzero(p > 0)
        if support.size <= rank: break
        k = _kernel_vector(A[:, support], tol)
        positive = np.flatnonzero(k > 0)
        ratios = p[support[positive]] / k[positive]
        j = positive[int(np.argmin(ratios))]
        alpha = float(ratios.min())
        q = p[support] - alpha * k
        q[j] = 0.0
        if q.min() < -tol.clamp: raise util.ContractError(f"reduction step produced weight {q.min():.3g}")
        p[support] = np.maximum(q, 0)
        p[p <= tol.support] = 0.0
        steps += 1
        metrics.reduction_steps.inc()
        drift = float(np.linalg.norm(d.states.bloch_matrix() @ p - target))
        if drift > MIXTURE_TOLERANCE: raise util.ContractError(f"mixture drifted by {drift:.3g} while reducing")
        logging.debug("reduction step %d dropped state %d, support now %d", steps, int(support[j]), int(np.count_nonzero(p)))
    if steps == 0: return d
    p /= p.sum()
    return Decomposition(d.states, p, target)
