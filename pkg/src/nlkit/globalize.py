"""Globalization: backtracking line search, Wolfe predicates, trust regions.

The line search minimizes the merit phi(alpha) = 0.5 * |f(u + alpha*du)|^2
approximately by geometric backtracking under the sufficient-decrease rule.
The trust region couples the dogleg step with the actual-vs-predicted
reduction ratio to adapt its radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import descent, jacobians, linalg
from .core import (CountedResidual, RetCode, SolveOptions, SolveResult,
                   Stats, check_convergence, resid_max_norm)
from .errors import LineSearchFailed, NonFiniteValue, SingularMatrix

_EPS = np.finfo(float).eps

SIMPLE = "simple"
NOCEDAL_WRIGHT = "nocedal_wright"


@dataclass
class MeritEvaluation:
    """Bundle for 1-d merit queries along a fixed direction.

    phi(alpha) evaluates 0.5*|f(u + alpha*du)|^2; phi0 and dphi0 are its
    value and directional derivative at alpha = 0 (dphi0 = f.J.du).
    """

    phi: callable
    phi0: float
    dphi0: float


def merit_along(fn, u, du, f_u, J=None, dphi0=None):
    """Construct the MeritEvaluation for a step du from u.

    dphi0 comes from f.(J du) when J is given; quasi-Newton callers pass
    their model value explicitly.
    """
    f_u = np.asarray(f_u, dtype=float)
    phi0 = 0.5 * float(f_u @ f_u)
    if dphi0 is None:
        Jdu = J.matvec(du) if hasattr(J, "matvec") else J @ du
        dphi0 = float(f_u @ Jdu)

    def phi(alpha):
        f_trial = fn.at(u + alpha * du)
        return 0.5 * float(f_trial @ f_trial)

    return MeritEvaluation(phi, phi0, dphi0)


def backtracking_search(merit, c1=1e-4, rho_shrink=0.5, alpha0=1.0,
                        max_backtracks=30):
    """Largest alpha in {alpha0 * rho^k} satisfying the Armijo condition.

    Raises LineSearchFailed after max_backtracks rejections.
    """
    if not merit.dphi0 < 0:
        raise LineSearchFailed(f"not a descent direction (dphi0={merit.dphi0:g})")
    alpha = alpha0
    for _ in range(max_backtracks + 1):
        value = merit.phi(alpha)
        # NaN/inf probes fail the comparison and backtrack like any rejection
        if value <= merit.phi0 + c1 * alpha * merit.dphi0:
            return alpha
        alpha *= rho_shrink
    raise LineSearchFailed(f"no sufficient decrease in {max_backtracks} backtracks")


def wolfe_conditions(merit, alpha, c1, c2, dphi_alpha):
    """Armijo, curvature, and strong-Wolfe predicates at a candidate alpha."""
    if not (0 < c1 < c2 < 1):
        raise ValueError("need 0 < c1 < c2 < 1")
    armijo = merit.phi(alpha) <= merit.phi0 + c1 * alpha * merit.dphi0
    curvature = dphi_alpha >= c2 * merit.dphi0
    strong = abs(dphi_alpha) <= c2 * abs(merit.dphi0)
    return {"armijo": bool(armijo), "curvature": bool(curvature),
            "strong": bool(strong)}


@dataclass(frozen=True)
class TrustState:
    """Radius plus the accept/expand thresholds of the update scheme.

    Defaults follow classical dogleg practice: shrink by half on rejection
    and expand already at ratio 0.5, which avoids radius collapse in long
    curved valleys.
    """

    radius: float
    radius_max: float
    eta1: float = 0.1
    eta2: float = 0.5
    shrink: float = 0.5
    expand: float = 2.0
    scheme: str = SIMPLE

    def __post_init__(self):
        if not (0 < self.radius <= self.radius_max):
            raise ValueError("need 0 < radius <= radius_max")
        if not (0 < self.eta1 < self.eta2 < 1):
            raise ValueError("need 0 < eta1 < eta2 < 1")
        if not (0 < self.shrink < 1 < self.expand):
            raise ValueError("need 0 < shrink < 1 < expand")
        if self.scheme not in (SIMPLE, NOCEDAL_WRIGHT):
            raise ValueError(f"unknown trust-region scheme {self.scheme!r}")


def initial_trust_state(u0, scheme=SIMPLE):
    r0 = max(1.0, float(np.max(np.abs(u0))) if len(u0) else 1.0)
    return TrustState(radius=r0, radius_max=1e3 * r0, scheme=scheme)


def tr_ratio(f_u, f_trial, J, du):
    """Actual-to-predicted reduction ratio of the squared residual norm.

    A degenerate predicted reduction returns -inf so the caller rejects.
    """
    f_u = np.asarray(f_u, dtype=float)
    f_trial = np.asarray(f_trial, dtype=float)
    Jdu = J.matvec(du) if hasattr(J, "matvec") else J @ du
    model = f_u + Jdu
    actual = float(f_u @ f_u) - float(f_trial @ f_trial)
    predicted = float(f_u @ f_u) - float(model @ model)
    if predicted < _EPS * float(f_u @ f_u):
        return -math.inf
    return actual / predicted


def tr_update(state, rho, du):
    """Accept/reject the step and rescale the radius.

    Simple scheme: expand on rho >= eta2, hold on the middle band, shrink
    and reject below eta1. NocedalWright additionally expands only when the
    step actually presses against the boundary.
    """
    if rho >= state.eta2:
        boundary = np.linalg.norm(du) >= 0.99 * state.radius
        if state.scheme == NOCEDAL_WRIGHT and not boundary:
            return state, True
        return replace(state, radius=min(state.expand * state.radius,
                                         state.radius_max)), True
    if rho >= state.eta1:
        return state, True
    # floor keeps the TrustState invariant satisfiable under underflow
    return replace(state, radius=max(state.shrink * state.radius, 1e-308)), False


def run_trust_region(problem, jac_spec=None, scheme=SIMPLE, options=None):
    """Dogleg trust-region driver over a materializing Jacobian strategy."""
    options = options or SolveOptions()
    jac_spec = jac_spec or jacobians.DUAL_DENSE
    if not jac_spec.materializes:
        raise ValueError("trust region needs a materializing jacobian strategy")

    stats = Stats()
    fn = CountedResidual(problem, stats)
    u = problem.u0.copy()
    f_u = fn.at(u)
    trace = [(0, resid_max_norm(f_u))] if options.store_trace else None

    def finish(code):
        return SolveResult(u, resid_max_norm(f_u), code, stats, trace)

    if not np.all(np.isfinite(f_u)):
        return finish(RetCode.NONFINITE)
    if check_convergence(f_u, options.abstol):
        return finish(RetCode.SUCCESS)

    jac = jacobians.bind(jac_spec, problem, fn, stats)
    state = initial_trust_state(u, scheme)
    cached = None  # (J, solve_fn) reused across rejected steps
    for k in range(1, options.maxiters + 1):
        if cached is None:
            try:
                J = jac.materialize(u)
            except NonFiniteValue:
                return finish(RetCode.NONFINITE)
            dense = J.to_dense() if hasattr(J, "to_dense") else J
            try:
                fac = linalg.LuFactorization(dense, strict=False)
            except SingularMatrix:
                return finish(RetCode.LINSOLVE_FAILED)
            cached = (J, fac.solve)
        J, solve_fn = cached
        stats.nlinsolve += 1
        du = descent.dogleg_direction(J, f_u, state.radius, solve_fn)
        if not np.all(np.isfinite(du)):
            return finish(RetCode.LINSOLVE_FAILED)
        u_trial = u + du
        f_trial = fn.at(u_trial)
        if np.all(np.isfinite(f_trial)):
            rho = tr_ratio(f_u, f_trial, J, du)
        else:
            rho = -math.inf  # overshot into overflow: reject and shrink
        state, accept = tr_update(state, rho, du)
        if accept:
            u, f_u = u_trial, f_trial
            stats.nsteps += 1
            cached = None
            if trace is not None:
                trace.append((k, resid_max_norm(f_u)))
            if check_convergence(f_u, options.abstol):
                return finish(RetCode.SUCCESS)
        if state.radius < 1e-300:
            break  # radius underflow: no representable step can be taken
    return finish(RetCode.MAXITERS)
