"""Smallest enclosing ball of balls, solved by smoothing plus Newton-CG.

The package bundles three solvers over the same continuation driver (a
truncated-sum Newton-CG, the classical exact Newton-CG, and a smoothing
L-BFGS baseline), a deterministic benchmark instance generator with text
and binary file formats, and a CLI for generation, solving, and benchmark
suites.
"""

from .baselines import (
    LbfgsMemory,
    lbfgs_direction,
    solve_classical_newton_cg,
    solve_smoothing_lbfgs,
)
from .cg import CgOutcome, NumericalError, cg_solve, forcing_term
from .newton import (
    ArmijoStep,
    ConvergenceError,
    LineSearchError,
    SolveDiagnostics,
    SolveReport,
    SolverConfig,
    StageStats,
    armijo_search,
    solve,
    solve_inner,
)
from .problem import (
    Ball,
    GeneratorState,
    Instance,
    InstanceFormatError,
    generate_instance,
    generator_next,
    load_instance,
    read_instance,
    save_instance,
    write_instance,
)
from .smooth import (
    EvalWorkspace,
    build_workspace,
    exact_hessian_vector,
    objective_nonsmooth,
    smoothed_gradient,
    smoothed_objective,
)
from .truncation import (
    ActiveSet,
    build_active_set,
    truncated_gradient,
    truncated_hessian_vector,
    truncated_objective,
)

__version__ = "0.1.0"

__all__ = [
    "ActiveSet",
    "ArmijoStep",
    "Ball",
    "CgOutcome",
    "ConvergenceError",
    "EvalWorkspace",
    "GeneratorState",
    "Instance",
    "InstanceFormatError",
    "LbfgsMemory",
    "LineSearchError",
    "NumericalError",
    "SolveDiagnostics",
    "SolveReport",
    "SolverConfig",
    "StageStats",
    "armijo_search",
    "build_active_set",
    "build_workspace",
    "cg_solve",
    "exact_hessian_vector",
    "forcing_term",
    "generate_instance",
    "generator_next",
    "lbfgs_direction",
    "load_instance",
    "objective_nonsmooth",
    "read_instance",
    "save_instance",
    "smoothed_gradient",
    "smoothed_objective",
    "solve",
    "solve_classical_newton_cg",
    "solve_inner",
    "solve_smoothing_lbfgs",
    "truncated_gradient",
    "truncated_hessian_vector",
    "truncated_objective",
    "write_instance",
]
