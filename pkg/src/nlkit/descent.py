"""Descent direction computations for the outer nonlinear iterations.

Every operation takes the Jacobian in whatever form the caller has (dense
array, CscMatrix, or just a linear-solve closure) and returns a step vector;
the drivers own all counting and globalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import autodiff, linalg
_EPS = np.finfo(float).eps
_TINY = 1e-300


@dataclass(frozen=True)
class DescentSpec:
    """Which direction the outer iteration follows.

    kind: "newton" | "steepest" | "dogleg" | "damped_newton" | "halley"
    | "potra_ptak". The damped-Newton fields configure Levenberg-Marquardt
    damping and the optional geodesic second-order correction.
    """

    kind: str = "newton"
    lm_lambda0: float = 1e-3
    lm_up: float = 2.0
    lm_down: float = 3.0
    use_geodesic: bool = False
    geo_h: float = 0.1
    geo_alpha: float = 0.75

    def __post_init__(self):
        kinds = ("newton", "steepest", "dogleg", "damped_newton", "halley",
                 "potra_ptak")
        if self.kind not in kinds:
            raise ValueError(f"unknown descent kind {self.kind!r}")
        if not (self.lm_lambda0 > 0 and self.lm_up > 1 and self.lm_down > 1
                and self.geo_h > 0 and self.geo_alpha >= 0):
            raise ValueError("damped-Newton parameters out of range")


NEWTON = DescentSpec("newton")
STEEPEST = DescentSpec("steepest")
DOGLEG = DescentSpec("dogleg")
HALLEY = DescentSpec("halley")
POTRA_PTAK = DescentSpec("potra_ptak")


def DampedNewton(lambda0=1e-3, lam_up=2.0, lam_down=3.0, use_geodesic=False,
                 geo_h=0.1, geo_alpha=0.75):
    return DescentSpec("damped_newton", lambda0, lam_up, lam_down,
                       use_geodesic, geo_h, geo_alpha)


def _matvec(J, v):
    return J.matvec(v) if hasattr(J, "matvec") else J @ v


def _rmatvec(J, v):
    return J.rmatvec(v) if hasattr(J, "rmatvec") else J.T @ v


def newton_direction(solve_fn, f_u):
    """Step solving J du = -f_u through the supplied solve capability."""
    return solve_fn(-np.asarray(f_u, dtype=float))


def steepest_direction(J, f_u):
    """-J^T f_u; requires a materialized Jacobian."""
    return -_rmatvec(J, np.asarray(f_u, dtype=float))


def dogleg_direction(J, f_u, radius, solve_fn=None):
    """Powell dogleg step for the trust-region subproblem.

    Full Newton step when it fits in the radius; otherwise the Cauchy point
    (model minimizer along steepest descent, t* = |g|^2/|Jg|^2), scaled to
    the boundary when even that is outside; otherwise the interpolation
    between the two hitting the boundary exactly.
    """
    f_u = np.asarray(f_u, dtype=float)
    if solve_fn is None:
        fac = linalg.LuFactorization(J)
        solve_fn = fac.solve
    newton = solve_fn(-f_u)
    if np.linalg.norm(newton) <= radius:
        return newton
    g = _rmatvec(J, f_u)  # gradient of the merit; sd direction is -g
    Jg = _matvec(J, g)
    gg = float(g @ g)
    t_star = gg / max(float(Jg @ Jg), _TINY)
    cauchy = -t_star * g
    cnorm = float(np.linalg.norm(cauchy))
    if cnorm >= radius:
        return -(radius / math.sqrt(gg)) * g
    d = newton - cauchy
    a = float(d @ d)
    b = 2.0 * float(cauchy @ d)
    c = cnorm * cnorm - radius * radius
    tau = (-b + math.sqrt(b * b - 4.0 * a * c)) / (2.0 * a)
    return cauchy + tau * d


def lm_scaling(J):
    """Marquardt scaling: diag(J^T J) floored away from zero."""
    if hasattr(J, "to_dense"):
        J = J.to_dense()
    d = np.einsum("ij,ij->j", J, J)
    return np.maximum(d, 1e-12)


def damped_newton_direction(J, f_u, lam, path="qr"):
    """Levenberg-Marquardt step: (J^T J + lam * diag(D)) du = -J^T f_u.

    D = diag(J^T J). The "qr" path solves the equivalent stacked
    least-squares system [J; sqrt(lam * D)] for backward stability; the
    "cholesky" path factors the normal matrix directly and raises
    NotPositiveDefinite for the caller to escalate lam.
    """
    if hasattr(J, "to_dense"):
        J = J.to_dense()
    J = np.asarray(J, dtype=float)
    f_u = np.asarray(f_u, dtype=float)
    D = lm_scaling(J)
    if path == "cholesky":
        A = J.T @ J + lam * np.diag(D)
        return linalg.cholesky_solve(A, -J.T @ f_u)
    n = J.shape[1]
    stacked = np.vstack([J, np.diag(np.sqrt(lam * D))])
    rhs = np.concatenate([-f_u, np.zeros(n)])
    return linalg.qr_solve(stacked, rhs)


def geodesic_acceleration(f, u, theta, v, J, damped_solve, h=0.1,
                          geo_alpha=0.75):
    """Second-order correction along the current LM direction.

    d is the directional curvature of the residual along v; a solves the
    same damped system as the direction, (J^T J + lam*D) a = -J^T d, via
    ``damped_solve(d)``. accept tests 2|a|/|v| <= geo_alpha; the corrected
    step, when accepted, is v + a/2.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if hasattr(J, "to_dense"):
        J = J.to_dense()
    f0 = np.asarray(f(u, theta), dtype=float)
    f1 = np.asarray(f(u + h * v, theta), dtype=float)
    d = (2.0 / h) * ((f1 - f0) / h - J @ v)
    a = damped_solve(d)
    vnorm = float(np.linalg.norm(v))
    accept = bool(2.0 * float(np.linalg.norm(a)) <= geo_alpha * max(vnorm, _TINY))
    return a, accept


def halley_direction(solve_fn, f, u, theta, f_u, mode=autodiff.DUAL_FORWARD):
    """Halley step from two solves with one factorization.

    a solves J a = -f; b solves J b = H[a,a] (exact second directional
    derivative); the step is (a*a)/(a + b/2) elementwise. Entries whose
    denominator nearly cancels fall back to the Newton component a_i.
    """
    a = solve_fn(-np.asarray(f_u, dtype=float))
    haa = autodiff.second_directional(f, u, theta, a, mode)
    b = solve_fn(haa)
    denom = a + 0.5 * b
    step = np.empty_like(a)
    for i in range(len(a)):
        if abs(denom[i]) < _EPS * (abs(a[i]) + abs(b[i]) + _TINY):
            step[i] = a[i]
        else:
            step[i] = a[i] * a[i] / denom[i]
    return step


def potra_ptak_step(solve_fn, f, u, theta, f_u):
    """Two-stage multistep update reusing one Jacobian factorization.

    du1 solves J du1 = -f(u); y = u + du1; du2 solves J du2 = -f(y);
    returns (y + du2, y).
    """
    u = np.asarray(u, dtype=float)
    du1 = solve_fn(-np.asarray(f_u, dtype=float))
    y = u + du1
    f_y = np.asarray(f(y, theta), dtype=float)
    du2 = solve_fn(-f_y)
    return y + du2, y
