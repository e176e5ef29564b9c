"""Reference solvers: classical Newton-CG and smoothing with limited-memory BFGS.

Both share the outer continuation of the main driver.  The classical
variant is literally the main solver with truncation disabled, so the two
produce identical iterate sequences when the truncation tolerance is zero.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .newton import (
    CLASSICAL_NEWTON_CG,
    SMOOTHING_LBFGS,
    ConvergenceError,
    SolveDiagnostics,
    SolveReport,
    SolverConfig,
    StageStats,
    armijo_search,
    continuation_solve,
    solve_inner,
    zero_eps3_schedule,
)
from .problem import Instance
from .smooth import (
    build_workspace,
    smoothed_gradient,
    smoothed_objective,
    smoothed_objective_value,
)


def solve_classical_newton_cg(
    instance: Instance, config: SolverConfig | None = None
) -> SolveReport:
    """Newton-CG with exact gradients and Hessian products on every ball."""
    cfg = replace(config or SolverConfig(), eps3_schedule=zero_eps3_schedule)
    return continuation_solve(instance, cfg, CLASSICAL_NEWTON_CG, solve_inner)


@dataclass
class LbfgsMemory:
    """Bounded history of (step, gradient-difference, 1/(y.s)) triples.

    Pairs with nonpositive curvature y.s are discarded on arrival, which
    keeps the implied inverse-Hessian approximation positive definite.
    """

    capacity: int = 5
    pairs: deque = field(init=False)

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.pairs = deque(maxlen=self.capacity)

    def push(self, s: np.ndarray, y: np.ndarray) -> bool:
        """Store a pair if its curvature is positive; report whether stored."""
        ys = float(y @ s)
        if ys <= 0.0:
            return False
        self.pairs.append((s, y, 1.0 / ys))
        return True

    def clear(self) -> None:
        self.pairs.clear()

    def __len__(self) -> int:
        return len(self.pairs)


def lbfgs_direction(memory: LbfgsMemory, gradient: np.ndarray) -> np.ndarray:
    """Two-loop recursion: minus the approximate inverse Hessian times the gradient.

    The initial matrix is s.y/y.y times the identity, taken from the newest
    pair; with empty memory this is plain steepest descent.  The result is
    always a descent direction.
    """
    gradient = np.asarray(gradient, dtype=np.float64)
    if not np.all(np.isfinite(gradient)):
        raise ValueError("gradient must be finite")
    q = gradient.copy()
    pairs = list(memory.pairs)
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * float(s @ q)
        q -= a * y
        alphas.append(a)
    if pairs:
        s_new, y_new, _ = pairs[-1]
        q *= float(s_new @ y_new) / float(y_new @ y_new)
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * float(y @ q)
        q += (a - b) * s
    return -q


def _lbfgs_inner(
    instance: Instance,
    mu: float,
    x_start,
    config: SolverConfig,
    diagnostics: SolveDiagnostics | None = None,
) -> tuple[np.ndarray, StageStats]:
    """L-BFGS stage at fixed mu, with exact gradients throughout.

    The memory starts empty each stage: curvature pairs from a different mu
    describe a different function.
    """
    x = np.array(x_start, dtype=np.float64)
    eps2 = config.eps2_schedule(mu)
    memory = LbfgsMemory(config.lbfgs_memory)

    def objective_at(z):
        return smoothed_objective_value(instance, z, mu)

    sizes: list[int] = []
    inner = 0
    ws = build_workspace(instance, x, mu)
    while True:
        grad = smoothed_gradient(ws)
        grad_norm = float(np.linalg.norm(grad))
        sizes.append(instance.m)
        if grad_norm <= eps2:
            return x, StageStats(mu, inner, 0, sizes, grad_norm)
        if inner >= config.max_inner_iterations:
            raise ConvergenceError(
                f"stage mu={mu:g} exceeded {config.max_inner_iterations} iterations "
                f"(gradient norm {grad_norm:.3e}, tolerance {eps2:g})"
            )

        d = lbfgs_direction(memory, grad)
        slope = float(d @ grad)
        if slope >= 0.0:
            # Rounding produced a non-descent direction; restart the memory.
            memory.clear()
            d = -grad
            slope = -(grad_norm * grad_norm)
        f_x = smoothed_objective(ws)

        step = armijo_search(objective_at, x, d, grad, f_x, config)
        if diagnostics is not None:
            diagnostics.armijo.append(
                {
                    "mu": mu,
                    "f_x": f_x,
                    "slope": slope,
                    "alpha": step.alpha,
                    "f_new": step.f_new,
                    "trials": step.trials,
                    "c1": config.c1,
                    "beta": config.beta,
                }
            )

        ws_new = build_workspace(instance, step.x_new, mu)
        grad_new = smoothed_gradient(ws_new)
        memory.push(step.x_new - x, grad_new - grad)
        x = step.x_new
        ws = ws_new
        inner += 1


def solve_smoothing_lbfgs(
    instance: Instance, config: SolverConfig | None = None
) -> SolveReport:
    """Continuation with an L-BFGS inner solver (the smoothing baseline)."""
    return continuation_solve(
        instance, config or SolverConfig(), SMOOTHING_LBFGS, _lbfgs_inner
    )
