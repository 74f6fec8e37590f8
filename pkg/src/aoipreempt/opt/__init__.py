"""Global optimization of per-sensor preemption probabilities."""
from .bnb import BnbResult, InfeasibleBox, branch_and_bound, optimize
from .program import (
    BudgetExceeded,
    EpBounds,
    FractionalProgram,
    MonotonicityViolated,
    build_fractional_program,
    ep_bounds,
    eval_objective,
    grid_oracle,
    iteration_bound_terms,
    iteration_upper_bound,
    lipschitz_bound,
)
from .simplex import LpResult, solve_lp

__all__ = [
    "BnbResult",
    "BudgetExceeded",
    "EpBounds",
    "FractionalProgram",
    "InfeasibleBox",
    "LpResult",
    "MonotonicityViolated",
    "branch_and_bound",
    "build_fractional_program",
    "ep_bounds",
    "eval_objective",
    "grid_oracle",
    "iteration_bound_terms",
    "iteration_upper_bound",
    "lipschitz_bound",
    "optimize",
    "solve_lp",
]
