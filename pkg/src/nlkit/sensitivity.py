"""Implicit-function-theorem sensitivities of a root with respect to the
problem parameters.

Differentiates the identity f(u*(theta), theta) = 0 directly instead of
unrolling solver iterations: one Jacobian factorization gives either the
full forward sensitivity du*/dtheta (p back-solves) or, for a scalar loss,
the adjoint gradient (one transposed solve regardless of p).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff, linalg
from .autodiff import DUAL_FORWARD


@dataclass
class SensitivityResult:
    value: np.ndarray       # du*/dtheta matrix (forward) or gradient (adjoint)
    solve_residual: float   # achieved linear-solve residual, max-norm


def _state_jacobian(problem, u_star, theta, mode):
    if problem.analytic_jacobian is not None:
        return np.asarray(problem.analytic_jacobian(u_star, theta), dtype=float)
    return autodiff.dense_jacobian(problem.residual, u_star, theta, mode)


def _check_root(problem, u_star, theta, abstol):
    r = np.asarray(problem.residual(u_star, theta), dtype=float)
    rmax = float(np.max(np.abs(r))) if r.size else 0.0
    if not rmax <= 10.0 * abstol:
        raise ValueError(f"u_star is not a root to the required accuracy "
                         f"(|f|_inf = {rmax:.3e} > {10 * abstol:.3e})")


def ift_forward(problem, u_star, theta, abstol=1e-8, mode=DUAL_FORWARD,
                full=False):
    """du*/dtheta: solves (df/du) S = -(df/dtheta) at the root.

    One LU factorization, p back-solves. Raises SingularMatrix when the
    state Jacobian cannot be factored.
    """
    u_star = np.asarray(u_star, dtype=float)
    theta = np.asarray(theta, dtype=float)
    _check_root(problem, u_star, theta, abstol)
    Ju = _state_jacobian(problem, u_star, theta, mode)
    Jt = autodiff.param_jacobian(problem.residual, u_star, theta, mode)
    fac = linalg.LuFactorization(Ju)
    S = np.column_stack([fac.solve(-Jt[:, j]) for j in range(Jt.shape[1])]) \
        if Jt.shape[1] else np.zeros((len(u_star), 0))
    if not full:
        return S
    resid = float(np.max(np.abs(Ju @ S + Jt))) if Jt.size else 0.0
    return SensitivityResult(S, resid)


def ift_adjoint(problem, u_star, theta, gbar, abstol=1e-8, mode=DUAL_FORWARD,
                full=False):
    """Gradient of a scalar loss g(u*) w.r.t. theta via one adjoint solve.

    gbar is dg/du at the root; solves (df/du)^T lam = gbar and returns
    -(df/dtheta)^T lam.
    """
    u_star = np.asarray(u_star, dtype=float)
    theta = np.asarray(theta, dtype=float)
    gbar = np.asarray(gbar, dtype=float)
    _check_root(problem, u_star, theta, abstol)
    Ju = _state_jacobian(problem, u_star, theta, mode)
    Jt = autodiff.param_jacobian(problem.residual, u_star, theta, mode)
    fac = linalg.LuFactorization(Ju)
    lam = fac.solve_transpose(gbar)
    grad = -(Jt.T @ lam) if Jt.size else np.zeros(0)
    if not full:
        return grad
    resid = float(np.max(np.abs(Ju.T @ lam - gbar)))
    return SensitivityResult(grad, resid)
