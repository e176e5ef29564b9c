"""Smoothed max-distance model: objective, softmax weights, gradient, Hessian products.

For a smoothing parameter mu > 0 each ball contributes the value
sqrt(|x - c_i|^2 + mu^2) + r_i, and the model aggregates the contributions
with a log-sum-exp of sharpness 1/mu.  Every exponential here is evaluated
relative to the per-point maximum so its argument is <= 0; nothing can
overflow no matter how small mu gets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .problem import Instance


@dataclass
class EvalWorkspace:
    """Cached per-point quantities shared by objective/gradient/Hessian calls.

    Building one costs a single O(m*n) pass; everything downstream reuses
    the arrays.  Workspaces must not be shared mutably between concurrent
    solves.
    """

    instance: Instance
    x: np.ndarray
    mu: float
    diff: np.ndarray        # x - c_i, one row per ball
    smooth_dist: np.ndarray  # sqrt(|x - c_i|^2 + mu^2), always >= mu
    ball_values: np.ndarray  # smooth_dist + r_i
    max_value: float         # max of ball_values
    exp_terms: np.ndarray    # exp((ball_values - max_value)/mu), arguments <= 0
    exp_sum: float           # sum of exp_terms, always >= 1
    weights: np.ndarray      # softmax weights, sum to 1 up to rounding
    _grad: np.ndarray | None = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return self.weights.shape[0]

    @property
    def n(self) -> int:
        return self.x.shape[0]


def _check_point(instance: Instance, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (instance.n,):
        raise ValueError(f"x has shape {x.shape}, expected ({instance.n},)")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite coordinate in x")
    return x


def objective_nonsmooth(instance: Instance, x) -> float:
    """Largest distance-plus-radius over the balls: the quantity being minimized."""
    x = _check_point(instance, x)
    diff = x - instance.centers
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return float(np.max(dist + instance.radii))


def build_workspace(instance: Instance, x, mu: float) -> EvalWorkspace:
    """Evaluate and cache all per-ball quantities at the point x."""
    x = _check_point(instance, x)
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    mu = float(mu)
    diff = x - instance.centers
    smooth_dist = np.sqrt(np.einsum("ij,ij->i", diff, diff) + mu * mu)
    ball_values = smooth_dist + instance.radii
    max_value = float(ball_values.max())
    exp_terms = np.exp((ball_values - max_value) / mu)
    exp_sum = float(np.sum(exp_terms))
    weights = exp_terms / exp_sum
    return EvalWorkspace(
        instance=instance,
        x=x,
        mu=mu,
        diff=diff,
        smooth_dist=smooth_dist,
        ball_values=ball_values,
        max_value=max_value,
        exp_terms=exp_terms,
        exp_sum=exp_sum,
        weights=weights,
    )


def smoothed_objective(ws: EvalWorkspace) -> float:
    """Log-sum-exp aggregate of the per-ball values, shifted for overflow safety."""
    return ws.max_value + ws.mu * math.log(ws.exp_sum)


def smoothed_objective_value(instance: Instance, x, mu: float) -> float:
    """Objective-only evaluation without materializing the (m, n) difference array.

    Uses |x - c|^2 = |x|^2 - 2 c.x + |c|^2, one mat-vec over the centers.
    Intended for line-search trials, where no derivatives are needed; the
    expansion can lose a few low bits when x nearly coincides with a center,
    which is harmless for comparing objective values.
    """
    x = _check_point(instance, x)
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    sq = instance.center_sqnorms - 2.0 * (instance.centers @ x) + float(x @ x)
    np.maximum(sq, 0.0, out=sq)
    values = np.sqrt(sq + mu * mu) + instance.radii
    max_value = float(values.max())
    return max_value + mu * math.log(float(np.sum(np.exp((values - max_value) / mu))))


def smoothed_gradient(ws: EvalWorkspace) -> np.ndarray:
    """Weighted sum of the per-ball directions (x - c_i)/smooth_dist_i.

    The result has norm < 1.  Cached on the workspace.
    """
    if ws._grad is None:
        ws._grad = ws.diff.T @ (ws.weights / ws.smooth_dist)
    return ws._grad


class StructuredHessianOperator:
    """Matrix-free product with the smoothed-model Hessian.

    Works on any ball subset: pass the rows, smoothed distances, and
    (renormalized) weights for that subset together with the matching
    gradient.  The coefficient arrays depend only on the evaluation point,
    so one operator instance serves a whole inner CG solve; each product
    then costs two (k, n) mat-vecs.
    """

    def __init__(self, diff, smooth_dist, weights, grad, mu: float):
        self.diff = diff
        self.coef = (1.0 / mu - 1.0 / smooth_dist) * weights / (smooth_dist * smooth_dist)
        self.diag = float(np.sum(weights / smooth_dist))
        self.grad = grad
        self.grad_over_mu = grad / mu
        self.n = diff.shape[1]

    def __call__(self, d: np.ndarray) -> np.ndarray:
        t = self.diff @ d
        out = self.diff.T @ (self.coef * t)
        out += self.diag * d
        out -= (self.grad @ d) * self.grad_over_mu
        return out


def exact_hessian_operator(ws: EvalWorkspace) -> StructuredHessianOperator:
    """Operator for the full-sum Hessian (all m balls)."""
    return StructuredHessianOperator(
        ws.diff, ws.smooth_dist, ws.weights, smoothed_gradient(ws), ws.mu
    )


def exact_hessian_vector(ws: EvalWorkspace, d) -> np.ndarray:
    """Full-sum Hessian times d, computed in O(m*n) without forming the matrix."""
    d = np.asarray(d, dtype=np.float64)
    if d.shape != (ws.n,):
        raise ValueError(f"d has shape {d.shape}, expected ({ws.n},)")
    return exact_hessian_operator(ws)(d)
