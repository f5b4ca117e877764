"""Quasi-Newton Jacobian approximations: Broyden, limited-memory Broyden,
and diagonal (Klement-style) secant updates, with init/reinit rules.

The Broyden family is kept in inverse form so the linear "solve" is a
matrix-vector (or recurrence) application; the diagonal form approximates
the forward Jacobian diagonal. Updates are functional: each returns a new
state.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff, linalg
from .errors import SingularMatrix

DENSE_INVERSE = "dense_inverse"
LOW_RANK = "low_rank"
DIAGONAL = "diagonal"

IDENTITY_INIT = "identity"
TRUE_JACOBIAN_INIT = "true_jacobian"

NOT_DESCENT = "not_descent"
STALLING = "stalling"

_STALL_GUARD = 1e-12
_KLEMENT_EPS = 1e-9
_DIAG_FLOOR = 1e-12


@dataclass(frozen=True)
class QuasiNewtonConfig:
    form: str = DENSE_INVERSE
    init_rule: str = IDENTITY_INIT
    reinit_rule: str = NOT_DESCENT
    capacity: int = 10
    stall_window: int = 3
    stall_tol: float = 1e-12

    def __post_init__(self):
        if self.form not in (DENSE_INVERSE, LOW_RANK, DIAGONAL):
            raise ValueError(f"unknown form {self.form!r}")
        if self.init_rule not in (IDENTITY_INIT, TRUE_JACOBIAN_INIT):
            raise ValueError(f"unknown init rule {self.init_rule!r}")
        if self.reinit_rule not in (NOT_DESCENT, STALLING):
            raise ValueError(f"unknown reinit rule {self.reinit_rule!r}")
        if self.capacity < 1:
            raise ValueError("low-rank capacity must be >= 1")


@dataclass
class QuasiNewtonState:
    form: str
    H: np.ndarray = None        # dense inverse approximation
    pairs: list = field(default_factory=list)  # (s, Ht, s.Ht) triples
    diag: np.ndarray = None     # forward-Jacobian diagonal
    base_scale: float = 1.0
    steps_since_reinit: int = 0
    reinits: int = 0
    init_note: str = None       # set when TrueJacobian init fell back


def qn_init(problem, u0, rule=IDENTITY_INIT, form=DENSE_INVERSE, fn=None,
            stats=None):
    """Fresh approximation state at u0 under the given init rule.

    TrueJacobian (dense form only) inverts the exact Jacobian via LU and
    falls back to the identity with a recorded note if it is singular.
    """
    u0 = np.asarray(u0, dtype=float)
    n = u0.shape[0]
    if form == DIAGONAL:
        return QuasiNewtonState(DIAGONAL, diag=np.ones(n))
    if form == LOW_RANK:
        return QuasiNewtonState(LOW_RANK, pairs=[], base_scale=1.0)
    if rule == TRUE_JACOBIAN_INIT:
        f = fn if fn is not None else problem.residual
        J = autodiff.dense_jacobian(f, u0, problem.params)
        if stats is not None:
            stats.njac += 1
        try:
            fac = linalg.LuFactorization(J)
            H = np.column_stack([fac.solve(e) for e in np.eye(n)])
            if stats is not None:
                stats.nlinsolve += 1
            return QuasiNewtonState(DENSE_INVERSE, H=H)
        except SingularMatrix:
            return QuasiNewtonState(DENSE_INVERSE, H=np.eye(n),
                                    init_note="singular Jacobian at init; "
                                              "fell back to identity")
    return QuasiNewtonState(DENSE_INVERSE, H=np.eye(n))


def qn_apply(state, v):
    """Inverse-Jacobian action H @ v for any of the three forms."""
    v = np.asarray(v, dtype=float)
    if state.form == DENSE_INVERSE:
        return state.H @ v
    if state.form == LOW_RANK:
        return lbroyden_apply(state, v)
    return v / state.diag


def broyden_update(state, s, t):
    """Good-Broyden rank-one update of the dense inverse (Sherman-Morrison).

    H' = H + (s - H t)(s^T H) / (s^T H t); skipped when the denominator is
    negligible relative to |s||Ht| (stall guard).
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    Ht = state.H @ t
    sH = s @ state.H
    denom = float(s @ Ht)
    if abs(denom) < _STALL_GUARD * np.linalg.norm(s) * np.linalg.norm(Ht):
        return state
    H_new = state.H + np.outer(s - Ht, sH) / denom
    return replace(state, H=H_new)


def lbroyden_apply(state, v):
    """Apply the identity-seeded low-rank Broyden inverse to v."""
    w = state.base_scale * np.asarray(v, dtype=float)
    for s, u, d in state.pairs:
        w = w + (s - u) * (float(s @ w) / d)
    return w


def lbroyden_update(state, s, t, capacity=10):
    """Append a secant pair, evicting the oldest first when at capacity.

    Eviction happens before the new pair is derived, so the newest pair's
    secant equation H t = s always holds exactly.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    pairs = list(state.pairs)
    if len(pairs) >= capacity:
        pairs = pairs[len(pairs) - capacity + 1:]
    trimmed = replace(state, pairs=pairs)
    u = lbroyden_apply(trimmed, t)
    d = float(s @ u)
    if abs(d) < _STALL_GUARD * np.linalg.norm(s) * np.linalg.norm(u):
        return state
    pairs.append((s.copy(), u, d))
    return replace(state, pairs=pairs)


def klement_update(state, s, t):
    """Per-coordinate secant update of the diagonal Jacobian approximation.

    d'_i = t_i / s_i wherever |s_i| is meaningful relative to |s|_inf;
    magnitudes are floored (sign-preserving) to keep the division usable.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    d = state.diag.copy()
    thresh = _KLEMENT_EPS * float(np.max(np.abs(s)))
    for i in range(len(s)):
        if abs(s[i]) > thresh:
            d[i] = t[i] / s[i]
        mag = abs(d[i])
        if mag < _DIAG_FLOOR:
            d[i] = _DIAG_FLOOR if d[i] >= 0 else -_DIAG_FLOOR
    return replace(state, diag=d)


def qn_update(state, s, t, capacity=10):
    if state.form == DENSE_INVERSE:
        return broyden_update(state, s, t)
    if state.form == LOW_RANK:
        return lbroyden_update(state, s, t, capacity)
    return klement_update(state, s, t)


def reinit_check(rule, merit_decreased, du, u, resid_history,
                 window=3, tol=1e-12):
    """Should the approximation be rebuilt from its init rule?

    not_descent: the full step failed to decrease the merit, or the step
    collapsed below representable size. stalling: the best residual norm of
    the last ``window`` steps is no better (relatively) than what came
    before.
    """
    if rule == NOT_DESCENT:
        du = np.asarray(du, dtype=float)
        u = np.asarray(u, dtype=float)
        tiny_step = float(np.max(np.abs(du))) < np.finfo(float).eps * max(
            float(np.max(np.abs(u))), 1.0)
        return (not merit_decreased) or tiny_step
    if len(resid_history) < window + 1:
        return False
    prev_best = min(resid_history[:-window])
    recent_best = min(resid_history[-window:])
    return recent_best > prev_best * (1.0 - tol)
