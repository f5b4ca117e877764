"""Assembly of Jacobian strategies, descent directions, globalization, and
linear solvers into runnable algorithms, plus the default poly-algorithm
and the bracketed scalar ITP solver.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from . import descent, globalize, jacobians, linalg, quasinewton
from .core import (CountedResidual, RetCode, SolveOptions, SolveResult,
                   Stats, check_convergence, resid_max_norm)
from .errors import (IncompatibleSpec, InvalidBracket, KrylovBreakdown,
                     LineSearchFailed, NonFiniteValue, NotPositiveDefinite,
                     RankDeficient, SingularMatrix)

_EPS = np.finfo(float).eps
_TINY = 1e-300

_DIRECT_FAILURES = (SingularMatrix, RankDeficient, NotPositiveDefinite,
                    KrylovBreakdown)


@dataclass(frozen=True)
class Globalization:
    """None, backtracking line search, or trust region (with scheme)."""

    kind: str = "none"
    c1: float = 1e-4
    rho_shrink: float = 0.5
    alpha0: float = 1.0
    max_backtracks: int = 30
    tr_scheme: str = globalize.SIMPLE

    def __post_init__(self):
        if self.kind not in ("none", "line_search", "trust_region"):
            raise ValueError(f"unknown globalization {self.kind!r}")


NO_GLOBALIZATION = Globalization("none")


def LineSearch(c1=1e-4, rho_shrink=0.5, alpha0=1.0, max_backtracks=30):
    return Globalization("line_search", c1, rho_shrink, alpha0, max_backtracks)


def TrustRegion(scheme=globalize.SIMPLE):
    return Globalization("trust_region", tr_scheme=scheme)


@dataclass(frozen=True)
class AlgorithmSpec:
    """The composable triple (jacobian, descent, globalization) + linear solver."""

    jacobian: jacobians.JacobianSpec = jacobians.DUAL_DENSE
    descent: descent.DescentSpec = descent.NEWTON
    globalization: Globalization = NO_GLOBALIZATION
    linear: linalg.LinearSolverChoice = linalg.AUTO
    concrete_jac: bool = False


class Solver:
    """A validated, runnable algorithm specification."""

    def __init__(self, spec):
        self.spec = spec

    def solve(self, problem, options=None):
        return run_algorithm(problem, self.spec, options or SolveOptions())


def assemble(spec):
    """Validate block compatibility; returns a Solver or raises IncompatibleSpec."""
    jac, des, glob, lin = spec.jacobian, spec.descent, spec.globalization, spec.linear
    if jac.kind == "matrix_free" and lin.kind not in ("gmres", "auto"):
        raise IncompatibleSpec("matrix-free Jacobians require an iterative "
                               "Krylov linear solver (gmres or auto)")
    if glob.kind == "trust_region":
        if des.kind != "dogleg":
            raise IncompatibleSpec("trust-region globalization requires the "
                                   "dogleg descent")
        if not jac.materializes:
            raise IncompatibleSpec("trust region needs a materialized Jacobian "
                                   "for the dogleg/steepest directions")
    if des.kind == "dogleg" and glob.kind != "trust_region":
        raise IncompatibleSpec("dogleg descent only runs inside a trust region")
    if des.kind in ("halley", "potra_ptak") and glob.kind != "none":
        raise IncompatibleSpec(f"{des.kind} manages its own steps; "
                               "globalization must be none")
    if jac.kind == "quasi_newton":
        if des.kind != "newton":
            raise IncompatibleSpec("quasi-Newton strategies provide only the "
                                   "Newton-type inverse application")
        if glob.kind == "trust_region":
            raise IncompatibleSpec("quasi-Newton strategies cannot drive a "
                                   "trust region (no explicit matrix)")
    if des.kind in ("damped_newton", "steepest") and not jac.materializes:
        raise IncompatibleSpec(f"{des.kind} needs a materialized Jacobian")
    return Solver(spec)


def run_algorithm(problem, spec, options=None):
    options = options or SolveOptions()
    assemble(spec)
    t0 = time.perf_counter()
    if spec.globalization.kind == "trust_region":
        res = globalize.run_trust_region(problem, spec.jacobian,
                                         spec.globalization.tr_scheme, options)
    else:
        res = run_newton_family(problem, spec, options)
    res.stats.wall_time = time.perf_counter() - t0
    return res


# ---------------------------------------------------------------------------
# linear-solve capability for a materialized Jacobian

def _resolve_choice(J, linear, n):
    if linear.kind != "auto":
        return linear
    if hasattr(J, "to_dense"):
        traits = linalg.OperatorTraits(n=n, is_sparse=True, density=J.density())
    else:
        traits = linalg.OperatorTraits(n=n)
    return linalg.select_linear_solver(traits)


def _solve_capability(J, linear, stats, reltol):
    """Returns solve_fn(b) for the materialized Jacobian J."""
    n = J.n_rows if hasattr(J, "to_dense") else J.shape[0]
    choice = _resolve_choice(J, linear, n)
    if choice.kind == "gmres":
        if hasattr(J, "to_dense"):
            op = linalg.LinearOperator.from_csc(J)
            precond = linalg.ilu0(J) if choice.precond == "ilu0" else None
        else:
            op = linalg.LinearOperator.from_dense(J)
            precond = None
        dim = choice.krylov_dim or min(n, 100)

        def solve_fn(b):
            stats.nlinsolve += 1
            return linalg.gmres(op, b, dim, precond, reltol).x

        return solve_fn
    dense = J.to_dense() if hasattr(J, "to_dense") else np.asarray(J, dtype=float)
    if choice.kind == "lu":
        # drivers tolerate wildly-scaled intermediate Jacobians: only an
        # exactly singular factorization fails (strict checks stay on the
        # explicitly requested LU)
        fac = linalg.LuFactorization(dense, strict=(linear.kind != "auto"))

        def solve_fn(b):
            stats.nlinsolve += 1
            return fac.solve(b)

        return solve_fn
    solver = {"qr": linalg.qr_solve, "cholesky": linalg.cholesky_solve,
              "svd": linalg.svd_solve}[choice.kind]

    def solve_fn(b):
        stats.nlinsolve += 1
        return solver(dense, b)

    return solve_fn


def _gmres_reltol(abstol, fnorm2):
    return min(1e-4, max(1e-2 * abstol / max(fnorm2, _TINY), 1e-8))


# ---------------------------------------------------------------------------
# newton-family outer driver

def run_newton_family(problem, spec, options=None):
    """Outer iteration for Newton-type descents, with optional line search.

    Covers descent kinds newton/steepest/halley/potra_ptak/damped_newton
    over any Jacobian strategy (including quasi-Newton and matrix-free).
    """
    options = options or SolveOptions()
    if spec.jacobian.kind == "quasi_newton":
        return _run_quasi_newton(problem, spec, options)
    if spec.descent.kind == "damped_newton":
        return _run_levenberg_marquardt(problem, spec, options)

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

    jac = jacobians.bind(spec.jacobian, problem, fn, stats)
    matrix_free = spec.jacobian.kind == "matrix_free"
    theta = problem.params

    for k in range(1, options.maxiters + 1):
        fnorm2 = float(np.linalg.norm(f_u))
        reltol = _gmres_reltol(options.abstol, fnorm2)
        try:
            if matrix_free:
                precond = None
                if spec.concrete_jac or spec.linear.precond == "ilu0":
                    # concrete mode: materialize once per iterate, build the
                    # preconditioner, and take products from the matrix
                    Jc = jac.materialize(u)
                    precond = linalg.ilu0(Jc)
                    op = linalg.LinearOperator.from_csc(Jc)
                else:
                    op = jac.operator(u)
                dim = spec.linear.krylov_dim or min(problem.n, 100)

                def solve_fn(b, _op=op, _pc=precond, _dim=dim, _rt=reltol):
                    stats.nlinsolve += 1
                    return linalg.gmres(_op, b, _dim, _pc, _rt).x

                J = op
            else:
                J = jac.materialize(u)
                solve_fn = _solve_capability(J, spec.linear, stats, reltol)

            if spec.descent.kind == "newton":
                du = descent.newton_direction(solve_fn, f_u)
            elif spec.descent.kind == "steepest":
                du = descent.steepest_direction(J, f_u)
            elif spec.descent.kind == "halley":
                du = descent.halley_direction(solve_fn, fn, u, theta, f_u,
                                              spec.jacobian.mode)
            elif spec.descent.kind == "potra_ptak":
                u_next, _y = descent.potra_ptak_step(solve_fn, fn, u, theta, f_u)
                f_next = fn.at(u_next)
                if not (np.all(np.isfinite(u_next)) and np.all(np.isfinite(f_next))):
                    return finish(RetCode.NONFINITE)
                u, f_u = u_next, f_next
                stats.nsteps += 1
                if trace is not None:
                    trace.append((k, resid_max_norm(f_u)))
                if check_convergence(f_u, options.abstol):
                    return finish(RetCode.SUCCESS)
                continue
            else:
                raise IncompatibleSpec(f"descent {spec.descent.kind!r} not "
                                       "handled by the newton-family driver")
        except _DIRECT_FAILURES:
            return finish(RetCode.LINSOLVE_FAILED)
        except NonFiniteValue:
            return finish(RetCode.NONFINITE)

        alpha = 1.0
        if spec.globalization.kind == "line_search":
            g = spec.globalization
            if matrix_free:
                # the operator's apply does its own work accounting
                Jdu = J.apply(du)
                merit = globalize.merit_along(fn, u, du, f_u,
                                              dphi0=float(f_u @ Jdu))
            else:
                merit = globalize.merit_along(fn, u, du, f_u, J=J)
            try:
                alpha = globalize.backtracking_search(merit, g.c1, g.rho_shrink,
                                                      g.alpha0, g.max_backtracks)
            except LineSearchFailed:
                return finish(RetCode.LINESEARCH_FAILED)

        u_next = u + alpha * du
        f_next = fn.at(u_next)
        if not (np.all(np.isfinite(u_next)) and np.all(np.isfinite(f_next))):
            return finish(RetCode.NONFINITE)
        u, f_u = u_next, f_next
        stats.nsteps += 1
        if trace is not None:
            trace.append((k, resid_max_norm(f_u)))
        if check_convergence(f_u, options.abstol):
            return finish(RetCode.SUCCESS)
    return finish(RetCode.MAXITERS)


def _run_quasi_newton(problem, spec, options):
    cfg = spec.jacobian.qn or quasinewton.QuasiNewtonConfig()
    stats = Stats()
    fn = CountedResidual(problem, stats)
    u = problem.u0.copy()
    f_u = fn.at(u)
    trace = [(0, resid_max_norm(f_u))] if options.store_trace else None

    def finish(code):
        res = SolveResult(u, resid_max_norm(f_u), code, stats, trace)
        return res

    if not np.all(np.isfinite(f_u)):
        return finish(RetCode.NONFINITE)
    if check_convergence(f_u, options.abstol):
        return finish(RetCode.SUCCESS)

    try:
        state = quasinewton.qn_init(problem, u, cfg.init_rule, cfg.form, fn,
                                    stats)
    except NonFiniteValue:
        return finish(RetCode.NONFINITE)
    resid_history = [float(np.linalg.norm(f_u))]

    for k in range(1, options.maxiters + 1):
        du = -quasinewton.qn_apply(state, f_u)
        stats.nlinsolve += 1
        alpha = 1.0
        if spec.globalization.kind == "line_search":
            g = spec.globalization
            merit = globalize.merit_along(fn, u, du, f_u,
                                          dphi0=-float(f_u @ f_u))
            try:
                alpha = globalize.backtracking_search(merit, g.c1, g.rho_shrink,
                                                      g.alpha0, g.max_backtracks)
            except LineSearchFailed:
                return finish(RetCode.LINESEARCH_FAILED)
        u_next = u + alpha * du
        f_next = fn.at(u_next)
        if not (np.all(np.isfinite(u_next)) and np.all(np.isfinite(f_next))):
            return finish(RetCode.NONFINITE)
        merit_decreased = (float(np.linalg.norm(f_next))
                           < float(np.linalg.norm(f_u)))
        s = u_next - u
        t = f_next - f_u
        u, f_u = u_next, f_next
        stats.nsteps += 1
        resid_history.append(float(np.linalg.norm(f_u)))
        if trace is not None:
            trace.append((k, resid_max_norm(f_u)))
        if check_convergence(f_u, options.abstol):
            return finish(RetCode.SUCCESS)
        if quasinewton.reinit_check(cfg.reinit_rule, merit_decreased,
                                    alpha * du, u, resid_history,
                                    cfg.stall_window, cfg.stall_tol):
            if state.reinits > 0 and state.steps_since_reinit <= 1:
                return finish(RetCode.STALLED)
            reinits = state.reinits + 1
            try:
                state = quasinewton.qn_init(problem, u, cfg.init_rule,
                                            cfg.form, fn, stats)
            except NonFiniteValue:
                return finish(RetCode.NONFINITE)
            state.reinits = reinits
            resid_history = [float(np.linalg.norm(f_u))]
        else:
            state = quasinewton.qn_update(state, s, t, cfg.capacity)
            state.steps_since_reinit += 1
    return finish(RetCode.MAXITERS)


def _run_levenberg_marquardt(problem, spec, options):
    des = spec.descent
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

    jac = jacobians.bind(spec.jacobian, problem, fn, stats)
    path = "cholesky" if spec.linear.kind == "cholesky" else "qr"
    lam = des.lm_lambda0
    theta = problem.params
    J = None  # refreshed whenever the iterate moves

    for k in range(1, options.maxiters + 1):
        try:
            if J is None:
                J = jac.materialize(u)
                if hasattr(J, "to_dense"):
                    J = J.to_dense()
        except NonFiniteValue:
            return finish(RetCode.NONFINITE)
        try:
            v = descent.damped_newton_direction(J, f_u, lam, path)
            stats.nlinsolve += 1
        except (NotPositiveDefinite, RankDeficient, SingularMatrix):
            lam = min(lam * des.lm_up, 1e32)
            continue
        step = v
        if des.use_geodesic:
            def damped_solve(r, _J=J, _lam=lam):
                stats.nlinsolve += 1
                return descent.damped_newton_direction(_J, r, _lam, path)

            try:
                a, ok = descent.geodesic_acceleration(fn, u, theta, v, J,
                                                      damped_solve, des.geo_h,
                                                      des.geo_alpha)
            except _DIRECT_FAILURES:
                ok = False
            if not ok:
                lam = min(lam * des.lm_up, 1e32)
                continue
            step = v + 0.5 * a
        u_trial = u + step
        f_trial = fn.at(u_trial)
        trial_ok = (np.all(np.isfinite(u_trial)) and np.all(np.isfinite(f_trial))
                    and float(np.linalg.norm(f_trial)) < float(np.linalg.norm(f_u)))
        if trial_ok:
            u, f_u = u_trial, f_trial
            stats.nsteps += 1
            lam = max(lam / des.lm_down, 1e-12)
            J = None
            if trace is not None:
                trace.append((k, resid_max_norm(f_u)))
            if check_convergence(f_u, options.abstol):
                return finish(RetCode.SUCCESS)
        else:
            lam = min(lam * des.lm_up, 1e32)
    return finish(RetCode.MAXITERS)


def run_pseudo_transient(problem, spec=None, options=None, dt0=1e-3):
    """Damped Newton with switched-evolution relaxation of the damping.

    Solves (J + I/dt) du = -f each step; dt grows or shrinks with the ratio
    of successive residual 2-norms, clamped to [1e-4, 1e4] per step.
    """
    options = options or SolveOptions()
    if dt0 <= 0:
        raise ValueError("dt0 must be > 0")
    t_start = time.perf_counter()
    jac_spec = spec.jacobian if spec is not None else jacobians.DUAL_DENSE
    stats = Stats()
    fn = CountedResidual(problem, stats)
    u = problem.u0.copy()
    f_u = fn.at(u)
    trace = [(0, resid_max_norm(f_u))] if options.store_trace else None

    def finish(code):
        stats.wall_time = time.perf_counter() - t_start
        return SolveResult(u, resid_max_norm(f_u), code, stats, trace)

    if not np.all(np.isfinite(f_u)):
        return finish(RetCode.NONFINITE)
    if check_convergence(f_u, options.abstol):
        return finish(RetCode.SUCCESS)

    jac = jacobians.bind(jac_spec, problem, fn, stats)
    dt = dt0
    for k in range(1, options.maxiters + 1):
        try:
            J = jac.materialize(u)
        except NonFiniteValue:
            return finish(RetCode.NONFINITE)
        if hasattr(J, "to_dense"):
            J = J.to_dense()
        A = J + np.eye(problem.n) / dt
        try:
            stats.nlinsolve += 1
            du = linalg.lu_solve(A, -f_u)
        except SingularMatrix:
            return finish(RetCode.LINSOLVE_FAILED)
        u_next = u + du
        f_next = fn.at(u_next)
        if not (np.all(np.isfinite(u_next)) and np.all(np.isfinite(f_next))):
            return finish(RetCode.NONFINITE)
        prev_norm = float(np.linalg.norm(f_u))
        new_norm = float(np.linalg.norm(f_next))
        ratio = prev_norm / max(new_norm, _TINY)
        dt *= min(max(ratio, 1e-4), 1e4)
        u, f_u = u_next, f_next
        stats.nsteps += 1
        if trace is not None:
            trace.append((k, resid_max_norm(f_u)))
        if check_convergence(f_u, options.abstol):
            return finish(RetCode.SUCCESS)
    return finish(RetCode.MAXITERS)


# ---------------------------------------------------------------------------
# bracketed scalar solver

def solve_bracketed_itp(f, bracket, options=None, kappa2=2.0, n0=10):
    """Bracketed scalar root finding: interpolate, truncate, project.

    kappa1 is fixed at 0.2/(b - a); worst-case iteration count is the
    bisection count plus n0. Terminates when the bracket width drops to
    2*abstol or the residual magnitude reaches abstol.
    """
    options = options or SolveOptions()
    a, b = float(bracket[0]), float(bracket[1])
    if not a < b:
        raise InvalidBracket(f"need a < b, got [{a}, {b}]")
    ya, yb = float(f(a)), float(f(b))
    if ya == 0.0:
        return a
    if yb == 0.0:
        return b
    if ya * yb > 0:
        raise InvalidBracket("f(a) and f(b) must have opposite signs")
    sign_flip = 1.0 if yb > 0 else -1.0  # internally enforce ya < 0 < yb
    ya *= sign_flip
    yb *= sign_flip

    eps = options.abstol
    kappa1 = 0.2 / (b - a)
    n_half = max(0, math.ceil(math.log2((b - a) / (2.0 * eps))))
    n_max = n_half + n0
    j = 0
    while (b - a) > 2.0 * eps and j < options.maxiters:
        x_mid = 0.5 * (a + b)
        r = eps * 2.0 ** (n_max - j) - 0.5 * (b - a)
        delta = kappa1 * (b - a) ** kappa2
        # interpolate: regula falsi point
        x_f = (yb * a - ya * b) / (yb - ya)
        # truncate: perturb toward the midpoint
        sigma = 1.0 if x_mid - x_f >= 0 else -1.0
        x_t = x_f + sigma * delta if delta <= abs(x_mid - x_f) else x_mid
        # project onto the minmax interval around the midpoint
        x_itp = x_t if abs(x_t - x_mid) <= r else x_mid - sigma * r
        y = float(f(x_itp)) * sign_flip
        if abs(y) <= eps:
            return x_itp
        if y > 0:
            b, yb = x_itp, y
        elif y < 0:
            a, ya = x_itp, y
        else:
            return x_itp
        j += 1
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# default poly-algorithm

def _qn_spec(form, init_rule, reinit_rule):
    cfg = quasinewton.QuasiNewtonConfig(form=form, init_rule=init_rule,
                                        reinit_rule=reinit_rule)
    return AlgorithmSpec(
        jacobian=jacobians.JacobianSpec("quasi_newton", qn=cfg))


POLY_STAGES = (
    ("broyden", _qn_spec(quasinewton.DENSE_INVERSE, quasinewton.IDENTITY_INIT,
                         quasinewton.NOT_DESCENT)),
    ("klement", _qn_spec(quasinewton.DIAGONAL, quasinewton.IDENTITY_INIT,
                         quasinewton.STALLING)),
    ("broyden-true-jac", _qn_spec(quasinewton.DENSE_INVERSE,
                                  quasinewton.TRUE_JACOBIAN_INIT,
                                  quasinewton.NOT_DESCENT)),
    ("newton-raphson", AlgorithmSpec()),
    ("newton-backtracking", AlgorithmSpec(globalization=LineSearch())),
    ("trust-region", AlgorithmSpec(descent=descent.DOGLEG,
                                   globalization=TrustRegion())),
)

QN_SKIP_THRESHOLD = 25  # states; at or below, first-order methods start


def run_polyalgorithm(problem, options=None):
    """Fallback chain from cheap quasi-Newton stages to the trust region.

    Quasi-Newton stages are skipped when an analytic Jacobian is provided or
    the system has QN_SKIP_THRESHOLD or fewer states. Each stage gets the
    full iteration budget. Returns the first success, otherwise the stage
    result with the smallest final residual norm; per-stage return codes and
    summed work counters ride along either way.
    """
    options = options or SolveOptions()
    t0 = time.perf_counter()
    skip_qn = (problem.analytic_jacobian is not None
               or problem.n <= QN_SKIP_THRESHOLD)
    stages = POLY_STAGES[3:] if skip_qn else POLY_STAGES

    totals = Stats()
    results = []
    codes = []
    for _name, spec in stages:
        res = run_algorithm(problem, spec, options)
        for f_ in ("nf", "njac", "njvp", "nlinsolve", "nsteps"):
            setattr(totals, f_, getattr(totals, f_) + getattr(res.stats, f_))
        results.append(res)
        codes.append(res.retcode)
        if res.success:
            break
    best = min(results, key=lambda r: (not r.success, r.resid_norm))
    totals.wall_time = time.perf_counter() - t0
    return SolveResult(best.u_star, best.resid_norm, best.retcode, totals,
                       best.trace, stage_retcodes=codes)


# ---------------------------------------------------------------------------
# named presets (CLI-facing)

def _lm_spec(geodesic, linear):
    return AlgorithmSpec(descent=descent.DampedNewton(use_geodesic=geodesic),
                         linear=linear)


ALGORITHM_PRESETS = {
    "newton-raphson": AlgorithmSpec(),
    "newton-fd": AlgorithmSpec(jacobian=jacobians.FD_DENSE),
    "newton-backtracking": AlgorithmSpec(globalization=LineSearch()),
    "newton-sparse": AlgorithmSpec(jacobian=jacobians.COLORED_SPARSE),
    "newton-sparse-fd": AlgorithmSpec(
        jacobian=replace(jacobians.COLORED_SPARSE, mode=jacobians.FD_FORWARD)),
    "newton-krylov": AlgorithmSpec(jacobian=jacobians.MATRIX_FREE,
                                   linear=linalg.GMRES()),
    "newton-krylov-ilu0": AlgorithmSpec(jacobian=jacobians.MATRIX_FREE,
                                        linear=linalg.GMRES(precond="ilu0"),
                                        concrete_jac=True),
    "trust-region": AlgorithmSpec(descent=descent.DOGLEG,
                                  globalization=TrustRegion()),
    "trust-region-nw": AlgorithmSpec(
        descent=descent.DOGLEG,
        globalization=TrustRegion(globalize.NOCEDAL_WRIGHT)),
    "levenberg-marquardt": _lm_spec(False, linalg.QR),
    "lm-cholesky": _lm_spec(False, linalg.CHOLESKY),
    "lm-geodesic": _lm_spec(True, linalg.QR),
    "halley": AlgorithmSpec(descent=descent.HALLEY),
    "potra-ptak": AlgorithmSpec(descent=descent.POTRA_PTAK),
    "broyden": POLY_STAGES[0][1],
    "klement": POLY_STAGES[1][1],
    "broyden-true-jac": POLY_STAGES[2][1],
    "lbroyden": _qn_spec(quasinewton.LOW_RANK, quasinewton.IDENTITY_INIT,
                         quasinewton.NOT_DESCENT),
}


def run_preset(name, problem, options=None, seed=None):
    """Run a named algorithm preset; 'polyalgorithm' and 'pseudo-transient'
    dispatch to their dedicated drivers. ``seed``, when given, reseeds the
    sparsity-detection sampling of pattern-detecting strategies."""
    options = options or SolveOptions()
    if name == "polyalgorithm":
        return run_polyalgorithm(problem, options)
    if name == "pseudo-transient":
        return run_pseudo_transient(problem, None, options)
    if name not in ALGORITHM_PRESETS:
        raise KeyError(f"unknown algorithm {name!r}")
    spec = ALGORITHM_PRESETS[name]
    if seed is not None and spec.jacobian.kind in ("colored_sparse",
                                                   "matrix_free"):
        spec = replace(spec, jacobian=replace(spec.jacobian, detect_seed=seed))
    return run_algorithm(problem, spec, options)


def list_algorithms():
    return sorted(list(ALGORITHM_PRESETS) + ["polyalgorithm", "pseudo-transient"])
