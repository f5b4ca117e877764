"""Problem and result types plus the shared termination logic.

Convergence is judged on the max-norm of the residual only. Any NaN/Inf in
an iterate or residual aborts the solve with retcode NONFINITE rather than
attempting recovery.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np


class RetCode(enum.Enum):
    SUCCESS = "Success"
    MAXITERS = "MaxIters"
    LINESEARCH_FAILED = "LineSearchFailed"
    LINSOLVE_FAILED = "LinearSolveFailed"
    STALLED = "Stalled"
    NONFINITE = "NonFinite"
    TIMEOUT = "Timeout"  # used only by the benchmark harness


@dataclass(frozen=True)
class Problem:
    """A square nonlinear system: find u with residual(u, params) = 0.

    ``residual`` maps (u, params) to a length-n vector and must be pure and
    evaluable on object arrays of dual scalars for exact differentiation.
    """

    residual: callable
    u0: np.ndarray
    params: np.ndarray = field(default_factory=lambda: np.zeros(0))
    analytic_jacobian: callable = None
    known_pattern: object = None

    def __post_init__(self):
        object.__setattr__(self, "u0", np.atleast_1d(np.asarray(self.u0, dtype=float)))
        object.__setattr__(self, "params",
                           np.atleast_1d(np.asarray(self.params, dtype=float))
                           if np.ndim(self.params) else np.asarray([self.params], dtype=float))

    @property
    def n(self):
        return self.u0.shape[0]

    def f(self, u):
        return np.asarray(self.residual(u, self.params), dtype=float)


@dataclass(frozen=True)
class SolveOptions:
    abstol: float = 1e-8
    maxiters: int = 1000
    store_trace: bool = False

    def __post_init__(self):
        if not self.abstol > 0:
            raise ValueError("abstol must be > 0")
        if self.maxiters < 1:
            raise ValueError("maxiters must be >= 1")


@dataclass
class Stats:
    """Work counters for one solve; all monotone non-decreasing."""

    nf: int = 0
    njac: int = 0
    njvp: int = 0
    nlinsolve: int = 0
    nsteps: int = 0
    wall_time: float = 0.0


@dataclass
class SolveResult:
    u_star: np.ndarray
    resid_norm: float
    retcode: RetCode
    stats: Stats
    trace: list = None  # list of (iteration index, residual max-norm)
    stage_retcodes: list = None  # populated by the poly-algorithm

    @property
    def success(self):
        return self.retcode is RetCode.SUCCESS


def check_convergence(resid, abstol):
    """True iff the residual max-norm is at or below abstol (NaN fails)."""
    resid = np.asarray(resid, dtype=float)
    m = np.max(np.abs(resid)) if resid.size else 0.0
    return bool(np.isfinite(m) and m <= abstol)


def resid_max_norm(resid):
    resid = np.asarray(resid, dtype=float)
    return float(np.max(np.abs(resid))) if resid.size else 0.0


class CountedResidual:
    """Wraps a problem's residual so every evaluation bumps stats.nf."""

    def __init__(self, problem, stats):
        self._residual = problem.residual
        self.params = problem.params
        self.stats = stats

    def __call__(self, u, theta):
        self.stats.nf += 1
        with np.errstate(all="ignore"):  # overflow legitimately yields inf
            return self._residual(u, theta)

    def at(self, u):
        """Float residual at u with the problem's own parameters."""
        self.stats.nf += 1
        with np.errstate(all="ignore"):
            return np.asarray(self._residual(u, self.params), dtype=float)


def assert_pure(problem, u=None):
    """Test hook: evaluating the residual twice must give identical output."""
    u = problem.u0 if u is None else u
    a = problem.f(u)
    b = problem.f(u)
    if not np.array_equal(a, b):
        raise AssertionError("residual is not deterministic at the probe point")
    return True


def result_to_json(result):
    """Serialize a SolveResult to JSON (floats in shortest round-trip form)."""
    payload = {
        "u_star": [float(x) for x in np.atleast_1d(result.u_star)],
        "resid_norm": float(result.resid_norm),
        "retcode": result.retcode.value,
        "stats": {
            "nf": result.stats.nf,
            "njac": result.stats.njac,
            "njvp": result.stats.njvp,
            "nlinsolve": result.stats.nlinsolve,
            "nsteps": result.stats.nsteps,
            "wall_time": result.stats.wall_time,
        },
    }
    if result.trace is not None:
        payload["trace"] = [[int(k), float(r)] for k, r in result.trace]
    if result.stage_retcodes is not None:
        payload["stage_retcodes"] = [rc.value for rc in result.stage_retcodes]
    return json.dumps(payload)


def solve(problem, algorithm=None, options=None):
    """Solve a nonlinear problem.

    With ``algorithm=None`` the default poly-algorithm runs; otherwise pass
    an AlgorithmSpec (see nlkit.solvers). Returns a SolveResult.
    """
    from . import solvers  # deferred: solvers builds on this module

    options = options or SolveOptions()
    if algorithm is None:
        return solvers.run_polyalgorithm(problem, options)
    return solvers.run_algorithm(problem, algorithm, options)
