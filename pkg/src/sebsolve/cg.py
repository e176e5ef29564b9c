"""Conjugate gradients for the matrix-free Newton systems.

Solves H d = -grad for a symmetric positive-definite operator H supplied as
a callable, stopping once the residual drops below a caller-chosen fraction
of the gradient norm.  Starting from d = 0 every partial iterate is a
descent direction for the model, which the outer line search relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

CONVERGED = "converged"
ITERATION_CAP = "iteration_cap"
CURVATURE_BREAKDOWN = "curvature_breakdown"


class NumericalError(RuntimeError):
    """Non-finite values appeared during the CG iteration."""


@dataclass
class CgOutcome:
    direction: np.ndarray
    residual_norm: float  # |H d + grad| recomputed with one explicit product
    iterations: int
    status: str


def forcing_term(gradient_norm: float) -> float:
    """Relative CG tolerance for one Newton step: min(0.5, sqrt(|grad|))."""
    if gradient_norm < 0:
        raise ValueError("gradient_norm must be nonnegative")
    return min(0.5, math.sqrt(gradient_norm))


def cg_solve(
    apply_hessian: Callable[[np.ndarray], np.ndarray],
    grad: np.ndarray,
    eta: float,
    max_iters: int,
    curvature_tol: float = 1e-14,
    recheck_every: int = 50,
) -> CgOutcome:
    """Approximately solve H d = -grad with plain CG from d = 0.

    Stops as soon as |H d + grad| <= eta * |grad|, at `max_iters` completed
    steps, or when a search direction's curvature p'Hp falls to
    `curvature_tol * |p|^2` (a rounding artifact for a definite operator; on
    the very first step the steepest-descent direction -grad is returned
    instead).  Convergence is confirmed against an explicitly recomputed
    residual, and `residual_norm` always reports that explicit value; the
    recurrence residual is additionally refreshed every `recheck_every`
    steps to bound drift in long runs.
    """
    grad = np.asarray(grad, dtype=np.float64)
    grad_norm = float(np.linalg.norm(grad))
    if grad_norm == 0.0 or not math.isfinite(grad_norm):
        raise ValueError("grad must be nonzero and finite")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    tol = eta * grad_norm

    b = -grad
    d = np.zeros_like(grad)
    r = b.copy()
    p = r.copy()
    rr = float(r @ r)
    iters = 0
    status = ITERATION_CAP

    while iters < max_iters:
        hp = apply_hessian(p)
        if not np.all(np.isfinite(hp)):
            raise NumericalError(
                f"non-finite Hessian-vector product at CG iteration {iters}"
            )
        curv = float(p @ hp)
        if curv <= curvature_tol * float(p @ p):
            if iters == 0:
                # No progress possible; fall back to steepest descent.
                res = float(np.linalg.norm(apply_hessian(b) + grad))
                return CgOutcome(b.copy(), res, 0, CURVATURE_BREAKDOWN)
            status = CURVATURE_BREAKDOWN
            break
        alpha = rr / curv
        d += alpha * p
        iters += 1
        r -= alpha * hp
        if iters % recheck_every == 0:
            r = b - apply_hessian(d)
        rr_new = float(r @ r)
        if not math.isfinite(rr_new):
            raise NumericalError(f"non-finite residual at CG iteration {iters}")
        if math.sqrt(rr_new) <= tol:
            r_true = b - apply_hessian(d)
            res = float(np.linalg.norm(r_true))
            if res <= tol:
                return CgOutcome(d, res, iters, CONVERGED)
            # Recurrence drifted below tolerance prematurely; continue with
            # the true residual.
            r = r_true
            rr_new = res * res
        beta = rr_new / rr
        p = r + beta * p
        rr = rr_new

    res = float(np.linalg.norm(apply_hessian(d) + grad))
    return CgOutcome(d, res, iters, status)
