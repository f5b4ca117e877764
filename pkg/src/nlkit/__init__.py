"""nlkit: composable solvers for square systems of nonlinear equations."""

from .core import (Problem, RetCode, SolveOptions, SolveResult, Stats,
                   check_convergence, result_to_json, solve)
from .solvers import (ALGORITHM_PRESETS, AlgorithmSpec, LineSearch,
                      NO_GLOBALIZATION, TrustRegion, assemble,
                      list_algorithms, run_newton_family, run_polyalgorithm,
                      run_preset, run_pseudo_transient, solve_bracketed_itp)

__all__ = [
    "Problem", "RetCode", "SolveOptions", "SolveResult", "Stats",
    "check_convergence", "result_to_json", "solve",
    "ALGORITHM_PRESETS", "AlgorithmSpec", "LineSearch", "NO_GLOBALIZATION",
    "TrustRegion", "assemble", "list_algorithms", "run_newton_family",
    "run_polyalgorithm", "run_preset", "run_pseudo_transient",
    "solve_bracketed_itp",
]

__version__ = "0.1.0"
