"""Continuation driver: outer smoothing schedule, inner inexact Newton steps.

Each outer stage fixes a smoothing parameter mu, runs damped Newton steps
with CG-computed directions until the (truncated) gradient is small enough,
then warm-starts the next, smaller mu from the result.  The line search
always tests the full smoothed objective; only the derivative information
is truncated.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cg import cg_solve, forcing_term
from .problem import Instance
from .smooth import (
    build_workspace,
    objective_nonsmooth,
    smoothed_gradient,
    smoothed_objective,
    smoothed_objective_value,
)
from .truncation import build_active_set, truncated_gradient, truncated_hessian_operator

INEXACT_NEWTON_CG = "inexact_newton_cg"
CLASSICAL_NEWTON_CG = "classical_newton_cg"
SMOOTHING_LBFGS = "smoothing_lbfgs"


class LineSearchError(RuntimeError):
    """No sufficient-decrease step within the backtracking budget."""


class ConvergenceError(RuntimeError):
    """An inner stage exhausted its iteration budget."""


def default_mu_schedule(k: int) -> float:
    # 10.0**-k rounds to the exact decimal floats (1e-1, 1e-2, ...), so the
    # stage-6 value compares equal to the default eps1 of 1e-6; repeated
    # multiplication by 0.1 would overshoot by one ulp and add a stage.
    return 10.0 ** (-k)


def default_eps2_schedule(mu: float) -> float:
    """Stage gradient tolerance, floored at 1e-5 and capped at 1e-1."""
    return max(1e-5, min(1e-1, mu / 10.0))


def default_eps3_schedule(mu: float) -> float:
    """Constant truncation tolerance."""
    return 1e-2


def zero_eps3_schedule(mu: float) -> float:
    """Truncation disabled: every ball stays active (the classical method)."""
    return 0.0


@dataclass
class SolverConfig:
    """Tolerances and schedules for all three solvers.

    eps1 stops the outer continuation once the next mu falls to it or
    below.  eps2_schedule maps mu to the stage's gradient tolerance and
    eps3_schedule to its truncation tolerance.  The defaults reproduce the
    benchmark configuration exactly.
    """

    eps1: float = 1e-6
    c1: float = 1e-4
    beta: float = 0.5
    mu_schedule: Callable[[int], float] = default_mu_schedule
    eps2_schedule: Callable[[float], float] = default_eps2_schedule
    eps3_schedule: Callable[[float], float] = default_eps3_schedule
    max_backtracks: int = 60
    cg_max_iters: int | None = None  # None selects min(n, 200)
    max_inner_iterations: int = 10000
    x0: np.ndarray | None = None  # None starts from the origin
    include_final_mu_stage: bool = False
    lbfgs_memory: int = 5
    collect_diagnostics: bool = False

    def __post_init__(self):
        if self.eps1 < 0:
            raise ValueError("eps1 must be nonnegative")
        if not 0.0 < self.c1 < 1.0:
            raise ValueError("c1 must lie in (0, 1)")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if self.max_backtracks < 1:
            raise ValueError("max_backtracks must be >= 1")
        if self.cg_max_iters is not None and self.cg_max_iters < 1:
            raise ValueError("cg_max_iters must be >= 1")
        if self.max_inner_iterations < 1:
            raise ValueError("max_inner_iterations must be >= 1")
        if self.lbfgs_memory < 1:
            raise ValueError("lbfgs_memory must be >= 1")

    def cg_cap(self, n: int) -> int:
        # CG on a definite n x n system finishes in <= n exact steps; 200
        # bounds the cost at huge n.
        return self.cg_max_iters if self.cg_max_iters is not None else min(n, 200)


@dataclass
class StageStats:
    """Per-stage counters for one value of mu."""

    mu: float
    inner_iterations: int
    cg_iterations_total: int
    active_set_sizes: list[int]
    final_truncated_gradient_norm: float

    @property
    def mean_active_set(self) -> float:
        if not self.active_set_sizes:
            return 0.0
        return float(np.mean(self.active_set_sizes))


@dataclass
class SolveDiagnostics:
    """Optional contract-checking trail, populated when requested.

    Each CG record includes an independently recomputed residual; each line
    search record includes every trial so minimality can be re-verified.
    """

    cg: list[dict] = field(default_factory=list)
    armijo: list[dict] = field(default_factory=list)
    stage_exact_gradient_norms: list[float] = field(default_factory=list)
    stage_smoothed_values: list[float] = field(default_factory=list)
    stage_points: list[np.ndarray] = field(default_factory=list)


@dataclass
class SolveReport:
    """Result of one full continuation solve."""

    x_final: np.ndarray
    objective_nonsmooth: float
    objective_smoothed_final: float
    per_mu_stats: list[StageStats]
    wall_time: float
    algorithm: str
    diagnostics: SolveDiagnostics | None = None


@dataclass
class ArmijoStep:
    """Accepted line-search step plus the trial history that led to it."""

    alpha: float
    x_new: np.ndarray
    f_new: float
    trials: tuple[tuple[float, float], ...]  # (step length, objective) per trial


def armijo_search(
    objective: Callable[[np.ndarray], float],
    x: np.ndarray,
    direction: np.ndarray,
    grad: np.ndarray,
    f_x: float,
    config: SolverConfig,
) -> ArmijoStep:
    """Backtrack from a unit step until the sufficient-decrease test passes.

    Accepts the first step length beta^l, l = 0, 1, ..., with
    objective(x + beta^l d) <= f_x + c1 * beta^l * d.grad.  The slope uses
    whatever gradient the caller supplies (truncated or exact); the
    objective values must come from the full model.
    """
    slope = float(direction @ grad)
    alpha = 1.0
    trials: list[tuple[float, float]] = []
    for _ in range(config.max_backtracks + 1):
        x_trial = x + alpha * direction
        f_trial = objective(x_trial)
        trials.append((alpha, f_trial))
        if f_trial <= f_x + config.c1 * alpha * slope:
            return ArmijoStep(alpha, x_trial, f_trial, tuple(trials))
        alpha *= config.beta
    raise LineSearchError(
        f"no sufficient decrease within {config.max_backtracks} backtracks "
        f"(f={f_x:.17g}, slope={slope:.3e}, last trial f={trials[-1][1]:.17g}); "
        "this usually means the tolerance schedules are misconfigured"
    )


def solve_inner(
    instance: Instance,
    mu: float,
    x_start,
    config: SolverConfig,
    diagnostics: SolveDiagnostics | None = None,
) -> tuple[np.ndarray, StageStats]:
    """Minimize the smoothed objective at a fixed mu from the given start.

    Iterates: active set, truncated gradient, stop if small enough, CG
    direction, backtracking step.  Returns the first iterate whose
    truncated gradient norm is at or below the stage tolerance.
    """
    x = np.array(x_start, dtype=np.float64)
    eps2 = config.eps2_schedule(mu)
    eps3 = config.eps3_schedule(mu)
    cg_cap = config.cg_cap(instance.n)

    def objective_at(z):
        return smoothed_objective_value(instance, z, mu)

    sizes: list[int] = []
    cg_total = 0
    inner = 0
    ws = build_workspace(instance, x, mu)
    while True:
        active = build_active_set(ws, eps3)
        sizes.append(active.size)
        grad = truncated_gradient(ws, active)
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm <= eps2:
            return x, StageStats(mu, inner, cg_total, sizes, grad_norm)
        if inner >= config.max_inner_iterations:
            raise ConvergenceError(
                f"stage mu={mu:g} exceeded {config.max_inner_iterations} iterations "
                f"(gradient norm {grad_norm:.3e}, tolerance {eps2:g})"
            )

        apply_hessian = truncated_hessian_operator(ws, active, grad)
        outcome = cg_solve(apply_hessian, grad, forcing_term(grad_norm), cg_cap)
        cg_total += outcome.iterations
        d = outcome.direction
        f_x = smoothed_objective(ws)

        step = armijo_search(objective_at, x, d, grad, f_x, config)

        if diagnostics is not None:
            hd = apply_hessian(d)
            diagnostics.cg.append(
                {
                    "mu": mu,
                    "grad_norm": grad_norm,
                    "eta": forcing_term(grad_norm),
                    "status": outcome.status,
                    "iterations": outcome.iterations,
                    "residual_reported": outcome.residual_norm,
                    "residual_explicit": float(np.linalg.norm(hd + grad)),
                    "slope": float(d @ grad),
                    "identity_gap": float(abs(d @ (hd + grad))),
                    "direction_norm": float(np.linalg.norm(d)),
                }
            )
            diagnostics.armijo.append(
                {
                    "mu": mu,
                    "f_x": f_x,
                    "slope": float(d @ grad),
                    "alpha": step.alpha,
                    "f_new": step.f_new,
                    "trials": step.trials,
                    "c1": config.c1,
                    "beta": config.beta,
                }
            )

        x = step.x_new
        ws = build_workspace(instance, x, mu)
        inner += 1


InnerSolver = Callable[
    [Instance, float, np.ndarray, SolverConfig, SolveDiagnostics | None],
    tuple[np.ndarray, StageStats],
]


def continuation_solve(
    instance: Instance,
    config: SolverConfig,
    algorithm: str,
    inner_solver: InnerSolver = solve_inner,
) -> SolveReport:
    """Run the outer mu schedule around any inner solver and build the report.

    The continuation stops once the next scheduled mu is at or below eps1;
    with `include_final_mu_stage` that boundary stage is solved too.
    """
    if config.x0 is None:
        x = np.zeros(instance.n)
    else:
        x = np.array(config.x0, dtype=np.float64)
        if x.shape != (instance.n,):
            raise ValueError(f"x0 has shape {x.shape}, expected ({instance.n},)")

    diagnostics = SolveDiagnostics() if config.collect_diagnostics else None
    stages: list[StageStats] = []

    def run_stage(mu: float):
        nonlocal x
        x, stats = inner_solver(instance, mu, x, config, diagnostics)
        stages.append(stats)
        if diagnostics is not None:
            ws = build_workspace(instance, x, mu)
            diagnostics.stage_exact_gradient_norms.append(
                float(np.linalg.norm(smoothed_gradient(ws)))
            )
            diagnostics.stage_smoothed_values.append(smoothed_objective(ws))
            diagnostics.stage_points.append(x.copy())

    start = time.perf_counter()
    k = 0
    while True:
        run_stage(config.mu_schedule(k))
        k += 1
        mu_next = config.mu_schedule(k)
        if mu_next <= config.eps1:
            if config.include_final_mu_stage:
                run_stage(mu_next)
            break
    wall = time.perf_counter() - start

    ws_final = build_workspace(instance, x, stages[-1].mu)
    return SolveReport(
        x_final=x,
        objective_nonsmooth=objective_nonsmooth(instance, x),
        objective_smoothed_final=smoothed_objective(ws_final),
        per_mu_stats=stages,
        wall_time=wall,
        algorithm=algorithm,
        diagnostics=diagnostics,
    )


def solve(instance: Instance, config: SolverConfig | None = None) -> SolveReport:
    """Solve with truncated gradients and Hessian products (the fast path)."""
    return continuation_solve(instance, config or SolverConfig(), INEXACT_NEWTON_CG)
