"""secrecap: secrecy capacity of multi-antenna channels with multiple
eavesdroppers, computed through convex spectrum-sharing subproblems.

Rates are natural logarithms (nats) everywhere in the library; the CLI can
convert to bits on request.
"""

from . import backend
from .cr import (
    CrProblem,
    CrSolution,
    det_capacity,
    det_capacity_gradient,
    log_det_capacity,
    solve_cr,
)
from .linalg import (
    EigDecomposition,
    eigh,
    logdet_capacity,
    penalized_waterfill,
    waterfill_budget,
    whiten_inv_sqrt,
)
from .secrecy import (
    BoundsResult,
    FeasibilityOutcome,
    SecrecyProblem,
    SecrecySolution,
    SolverError,
    level_feasible,
    secrecy_bounds,
    secrecy_capacity,
    secrecy_capacity_miso,
    secrecy_capacity_single,
    secrecy_lower_bound,
    secrecy_rate,
    secrecy_upper_bound,
)

__version__ = "0.1.0"

__all__ = [
    "BoundsResult",
    "CrProblem",
    "CrSolution",
    "EigDecomposition",
    "FeasibilityOutcome",
    "SecrecyProblem",
    "SecrecySolution",
    "SolverError",
    "backend",
    "det_capacity",
    "det_capacity_gradient",
    "eigh",
    "level_feasible",
    "log_det_capacity",
    "logdet_capacity",
    "penalized_waterfill",
    "secrecy_bounds",
    "secrecy_capacity",
    "secrecy_capacity_miso",
    "secrecy_capacity_single",
    "secrecy_lower_bound",
    "secrecy_rate",
    "secrecy_upper_bound",
    "solve_cr",
    "waterfill_budget",
    "whiten_inv_sqrt",
]
