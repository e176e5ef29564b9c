"""Adaptive weight thresholding: active sets and the truncated model sums.

For small mu the softmax weights are nearly sparse, so balls whose weight
falls below an adaptive threshold can be dropped from the gradient and
Hessian sums with a controlled error.  The surviving weights are
renormalized so they again sum to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .smooth import EvalWorkspace, StructuredHessianOperator


@dataclass
class ActiveSet:
    """Balls whose softmax weight clears the threshold, with renormalized weights.

    `indices` are sorted 0-based positions into the instance.  Construction
    guarantees nonemptiness: the weights sum to one while the thresholds sum
    to at most mu/10 < 1, so at least one weight always qualifies.
    """

    indices: np.ndarray
    threshold: float
    mu: float
    weights: np.ndarray  # renormalized to sum to 1 over `indices`

    @property
    def size(self) -> int:
        return int(self.indices.size)


def active_threshold(mu: float, trunc_tol: float, m: int) -> float:
    """Per-weight cutoff: mu * trunc_tol / (10 m)."""
    return mu * trunc_tol / (10.0 * m)


def build_active_set(ws: EvalWorkspace, trunc_tol: float) -> ActiveSet:
    """Select all balls with weight >= the adaptive threshold (ties included).

    `trunc_tol` is the truncation tolerance in (0, 1]; zero is accepted and
    selects every ball, which reduces the truncated model to the exact one.
    """
    if not 0.0 <= trunc_tol <= 1.0:
        raise ValueError(f"trunc_tol must lie in [0, 1], got {trunc_tol}")
    threshold = active_threshold(ws.mu, trunc_tol, ws.m)
    indices = np.flatnonzero(ws.weights >= threshold)
    if indices.size == 0:
        raise RuntimeError(
            "internal error: empty active set (weights sum to 1, so some weight "
            "must clear the threshold)"
        )
    selected = ws.weights[indices]
    return ActiveSet(
        indices=indices,
        threshold=threshold,
        mu=ws.mu,
        weights=selected / np.sum(selected),
    )


def _active_rows(ws: EvalWorkspace, s: ActiveSet):
    # Full active set: reuse the workspace arrays instead of copying m rows.
    if s.size == ws.m:
        return ws.diff, ws.smooth_dist
    return ws.diff[s.indices], ws.smooth_dist[s.indices]


def truncated_objective(ws: EvalWorkspace, s: ActiveSet) -> float:
    """Log-sum-exp restricted to the active set; never exceeds the full value."""
    if s.size == ws.m:
        partial = ws.exp_sum
    else:
        partial = float(np.sum(ws.exp_terms[s.indices]))
    return ws.max_value + ws.mu * math.log(partial)


def truncated_gradient(ws: EvalWorkspace, s: ActiveSet) -> np.ndarray:
    """Renormalized weighted sum of directions over the active set; norm <= 1."""
    diff, smooth_dist = _active_rows(ws, s)
    return diff.T @ (s.weights / smooth_dist)


def truncated_hessian_operator(
    ws: EvalWorkspace, s: ActiveSet, grad: np.ndarray
) -> StructuredHessianOperator:
    """Operator for the truncated Hessian; build once per inner CG solve.

    `grad` must be the truncated gradient at the same point.
    """
    diff, smooth_dist = _active_rows(ws, s)
    return StructuredHessianOperator(diff, smooth_dist, s.weights, grad, ws.mu)


def truncated_hessian_vector(ws: EvalWorkspace, s: ActiveSet, d, grad) -> np.ndarray:
    """Truncated Hessian times d in O(|S|*n), never forming the n x n matrix."""
    d = np.asarray(d, dtype=np.float64)
    if d.shape != (ws.n,):
        raise ValueError(f"d has shape {d.shape}, expected ({ws.n},)")
    return truncated_hessian_operator(ws, s, grad)(d)
