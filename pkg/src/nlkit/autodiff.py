"""Forward-mode differentiation: dual numbers and finite differences.

Residual callables are evaluated on numpy object arrays of :class:`Dual`
scalars, so they must be written with generic numpy operations (arithmetic,
``np.exp``/``np.sin``/... ufuncs, slicing, ``np.roll``, reductions). Plain
float evaluation is untouched. Dual values nest, which is how second
directional derivatives are computed exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteValue

# Columns differentiated per dual sweep; larger systems are swept in chunks.
SEED_WIDTH = 8

_TINY = 1e-300


def _exp(x):
    return x.exp() if isinstance(x, Dual) else math.exp(x)


def _log(x):
    return x.log() if isinstance(x, Dual) else math.log(x)


def _sin(x):
    return x.sin() if isinstance(x, Dual) else math.sin(x)


def _cos(x):
    return x.cos() if isinstance(x, Dual) else math.cos(x)


def _sqrt(x):
    return x.sqrt() if isinstance(x, Dual) else math.sqrt(x)


class Dual:
    """Scalar carrying a value and a fixed-width tuple of partials.

    Arithmetic follows the chain rule. Components may themselves be Dual,
    which yields exact higher-order directional derivatives. ``abs`` at 0
    passes partials through with sign(0) = +1.
    """

    __slots__ = ("value", "partials")

    def __init__(self, value, partials):
        self.value = value
        self.partials = partials

    def __repr__(self):
        return f"Dual({self.value!r}, {self.partials!r})"

    # -- arithmetic ---------------------------------------------------------
    # ndarray operands return NotImplemented so numpy broadcasts the Dual
    # as an object scalar instead of burying an array inside one Dual

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value + other.value,
                        tuple(a + b for a, b in zip(self.partials, other.partials)))
        if isinstance(other, np.ndarray):
            return NotImplemented
        if type(other) is not float and not isinstance(other, Dual):
            other = float(other)  # numpy scalars poison later arithmetic
        return Dual(self.value + other, self.partials)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value - other.value,
                        tuple(a - b for a, b in zip(self.partials, other.partials)))
        if isinstance(other, np.ndarray):
            return NotImplemented
        if type(other) is not float:
            other = float(other)
        return Dual(self.value - other, self.partials)

    def __rsub__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        if type(other) is not float:
            other = float(other)
        return Dual(other - self.value, tuple(-a for a in self.partials))

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value * other.value,
                        tuple(self.value * b + other.value * a
                              for a, b in zip(self.partials, other.partials)))
        if isinstance(other, np.ndarray):
            return NotImplemented
        if type(other) is not float:
            other = float(other)
        return Dual(self.value * other, tuple(other * a for a in self.partials))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.value
            q = self.value * inv
            return Dual(q, tuple((a - q * b) * inv
                                 for a, b in zip(self.partials, other.partials)))
        if isinstance(other, np.ndarray):
            return NotImplemented
        inv = 1.0 / float(other)
        return Dual(self.value * inv, tuple(a * inv for a in self.partials))

    def __rtruediv__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        inv = 1.0 / self.value
        q = other * inv
        return Dual(q, tuple(-q * inv * a for a in self.partials))

    def __pow__(self, n):
        if isinstance(n, Dual):
            # a^b = exp(b log a); rare path, requires a > 0
            return (n * self.log()).exp()
        if isinstance(n, np.ndarray):
            return NotImplemented
        if n == 2:
            return Dual(self.value * self.value,
                        tuple(2.0 * self.value * a for a in self.partials))
        c = n * self.value ** (n - 1)
        return Dual(self.value ** n, tuple(c * a for a in self.partials))

    def __rpow__(self, base):
        if isinstance(base, np.ndarray):
            return NotImplemented
        c = self.value
        val = base ** c
        lb = _log(base)
        return Dual(val, tuple(val * lb * a for a in self.partials))

    def __neg__(self):
        return Dual(-self.value, tuple(-a for a in self.partials))

    def __pos__(self):
        return self

    def __abs__(self):
        s = 1.0 if self.value >= 0 else -1.0
        return Dual(abs(self.value), tuple(s * a for a in self.partials))

    # -- comparisons act on the value part ----------------------------------

    def _cmp_value(self, other):
        return other.value if isinstance(other, Dual) else other

    def __lt__(self, other):
        return self.value < self._cmp_value(other)

    def __le__(self, other):
        return self.value <= self._cmp_value(other)

    def __gt__(self, other):
        return self.value > self._cmp_value(other)

    def __ge__(self, other):
        return self.value >= self._cmp_value(other)

    def __eq__(self, other):
        return self.value == self._cmp_value(other)

    def __ne__(self, other):
        return self.value != self._cmp_value(other)

    __hash__ = None

    def __float__(self):
        v = self.value
        while isinstance(v, Dual):
            v = v.value
        return float(v)

    # -- elementary functions (numpy object ufuncs dispatch to these) -------

    def exp(self):
        e = _exp(self.value)
        return Dual(e, tuple(e * a for a in self.partials))

    def log(self):
        inv = 1.0 / self.value
        return Dual(_log(self.value), tuple(inv * a for a in self.partials))

    def sqrt(self):
        r = _sqrt(self.value)
        c = 0.5 / r
        return Dual(r, tuple(c * a for a in self.partials))

    def sin(self):
        c = _cos(self.value)
        return Dual(_sin(self.value), tuple(c * a for a in self.partials))

    def cos(self):
        s = _sin(self.value)
        return Dual(_cos(self.value), tuple(-s * a for a in self.partials))

    def tan(self):
        t = self.sin()
        return t / self.cos()

    def arctan(self):
        c = 1.0 / (1.0 + self.value * self.value)
        v = self.value.arctan() if isinstance(self.value, Dual) else math.atan(self.value)
        return Dual(v, tuple(c * a for a in self.partials))

    def sinh(self):
        return (self.exp() - (-self).exp()) * 0.5

    def cosh(self):
        return (self.exp() + (-self).exp()) * 0.5

    def tanh(self):
        e2 = (self * 2.0).exp()
        return (e2 - 1.0) / (e2 + 1.0)

    def sign(self):
        return 1.0 if self.value >= 0 else -1.0

    def conjugate(self):
        return self


@dataclass(frozen=True)
class DiffMode:
    """How derivatives are obtained: exact duals or finite differences.

    ``kind`` is one of ``"dual"``, ``"fd_forward"``, ``"fd_central"``; ``h``
    optionally overrides the automatic finite-difference step.
    """

    kind: str = "dual"
    h: float | None = None

    def __post_init__(self):
        if self.kind not in ("dual", "fd_forward", "fd_central"):
            raise ValueError(f"unknown DiffMode kind {self.kind!r}")
        if self.h is not None and not self.h > 0:
            raise ValueError("finite-difference step h must be > 0")

    @property
    def is_dual(self):
        return self.kind == "dual"


DUAL_FORWARD = DiffMode("dual")
FD_FORWARD = DiffMode("fd_forward")
FD_CENTRAL = DiffMode("fd_central")


def _check_finite(out, what="derivative"):
    if not np.all(np.isfinite(out)):
        raise NonFiniteValue(f"{what} evaluation produced NaN/Inf")
    return out


def _extract(out, width):
    """Split an object-array evaluation into (values, partials matrix)."""
    m = len(out)
    vals = np.empty(m)
    parts = np.zeros((m, width))
    for i, entry in enumerate(out):
        if isinstance(entry, Dual):
            vals[i] = entry.value
            parts[i, :] = entry.partials
        else:
            vals[i] = entry  # constant output component
    return vals, parts


_NUMERIC_ERRORS = (OverflowError, ZeroDivisionError, ValueError)


def forward_sweep(f, u, theta, seeds):
    """Evaluate ``f`` on dual inputs seeded with the columns of ``seeds``.

    ``seeds`` has shape (n, w). Returns ``(f(u), P)`` with ``P[:, k]`` equal
    to ``J(u) @ seeds[:, k]``, all exact to roundoff. Scalar-math overflow
    and domain errors surface as NonFiniteValue, matching the inf/nan
    semantics of plain float evaluation.
    """
    u = np.asarray(u, dtype=float)
    n = u.shape[0]
    w = seeds.shape[1]
    ud = np.empty(n, dtype=object)
    u_list = u.tolist()  # Python floats: much cheaper scalar arithmetic
    seed_rows = seeds.tolist()
    for i in range(n):
        ud[i] = Dual(u_list[i], tuple(seed_rows[i]))
    try:
        out = np.asarray(f(ud, theta), dtype=object)
        vals, parts = _extract(out, w)
    except _NUMERIC_ERRORS as exc:
        raise NonFiniteValue(f"dual evaluation failed: {exc}") from exc
    _check_finite(vals, "residual")
    _check_finite(parts)
    return vals, parts


def _fd_step(mode, u, v):
    if mode.h is not None:
        return mode.h
    scale = max(1.0, float(np.max(np.abs(u))) if len(u) else 1.0)
    vmax = max(float(np.max(np.abs(v))), _TINY)
    eps = np.finfo(float).eps
    if mode.kind == "fd_forward":
        return math.sqrt(eps) * scale / vmax
    return eps ** (1.0 / 3.0) * scale / vmax


def jvp(f, u, theta, v, mode=DUAL_FORWARD):
    """Directional derivative J(u) @ v of the residual at (u, theta)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise NonFiniteValue("jvp direction contains NaN/Inf")
    if mode.is_dual:
        _, parts = forward_sweep(f, u, theta, v.reshape(-1, 1))
        return parts[:, 0]
    h = _fd_step(mode, u, v)
    if mode.kind == "fd_forward":
        out = (np.asarray(f(u + h * v, theta), dtype=float)
               - np.asarray(f(u, theta), dtype=float)) / h
    else:
        out = (np.asarray(f(u + h * v, theta), dtype=float)
               - np.asarray(f(u - h * v, theta), dtype=float)) / (2.0 * h)
    return _check_finite(out)


def dense_jacobian(f, u, theta, mode=DUAL_FORWARD):
    """Full n-by-n Jacobian; dual mode sweeps columns in SEED_WIDTH chunks."""
    u = np.asarray(u, dtype=float)
    n = u.shape[0]
    if mode.is_dual:
        J = np.empty((n, n))
        eye = np.eye(n)
        for lo in range(0, n, SEED_WIDTH):
            hi = min(lo + SEED_WIDTH, n)
            _, parts = forward_sweep(f, u, theta, eye[:, lo:hi])
            J[:, lo:hi] = parts
        return J
    cols = [jvp(f, u, theta, e, mode) for e in np.eye(n)]
    return np.column_stack(cols)


def second_directional(f, u, theta, a, mode=DUAL_FORWARD):
    """d^2/de^2 f(u + e*a) at e = 0, via nested duals or central differences."""
    u = np.asarray(u, dtype=float)
    a = np.asarray(a, dtype=float)
    n = u.shape[0]
    if mode.is_dual:
        ud = np.empty(n, dtype=object)
        u_list = u.tolist()
        a_list = a.tolist()
        for i in range(n):
            inner = Dual(u_list[i], (a_list[i],))
            ud[i] = Dual(inner, (Dual(a_list[i], (0.0,)),))
        try:
            out = np.asarray(f(ud, theta), dtype=object)
            res = np.zeros(len(out))
            for i, entry in enumerate(out):
                if isinstance(entry, Dual) and isinstance(entry.partials[0], Dual):
                    res[i] = entry.partials[0].partials[0]
        except _NUMERIC_ERRORS as exc:
            raise NonFiniteValue(f"dual evaluation failed: {exc}") from exc
        return _check_finite(res)
    h = mode.h if mode.h is not None else (
        np.finfo(float).eps ** 0.25 * max(1.0, float(np.max(np.abs(u)))))
    fp = np.asarray(f(u + h * a, theta), dtype=float)
    f0 = np.asarray(f(u, theta), dtype=float)
    fm = np.asarray(f(u - h * a, theta), dtype=float)
    return _check_finite((fp - 2.0 * f0 + fm) / (h * h))


def param_jacobian(f, u, theta, mode=DUAL_FORWARD):
    """n-by-p Jacobian of the residual with respect to the parameters."""
    u = np.asarray(u, dtype=float)
    theta = np.asarray(theta, dtype=float)
    p = theta.shape[0]
    if p == 0:
        return np.zeros((u.shape[0], 0))
    if mode.is_dual:
        eye = np.eye(p)
        theta_list = theta.tolist()
        cols = []
        for lo in range(0, p, SEED_WIDTH):
            hi = min(lo + SEED_WIDTH, p)
            w = hi - lo
            td = np.empty(p, dtype=object)
            for i in range(p):
                td[i] = Dual(theta_list[i], tuple(eye[i, lo:hi].tolist()))
            try:
                out = np.asarray(f(u, td), dtype=object)
                _, parts = _extract(out, w)
            except _NUMERIC_ERRORS as exc:
                raise NonFiniteValue(f"dual evaluation failed: {exc}") from exc
            cols.append(_check_finite(parts))
        return np.hstack(cols)
    cols = []
    eps = np.finfo(float).eps
    for j in range(p):
        h = (mode.h if mode.h is not None
             else math.sqrt(eps) * max(1.0, abs(theta[j])))
        tp = theta.copy()
        tm = theta.copy()
        tp[j] += h
        if mode.kind == "fd_forward":
            col = (np.asarray(f(u, tp), dtype=float)
                   - np.asarray(f(u, theta), dtype=float)) / h
        else:
            tm[j] -= h
            col = (np.asarray(f(u, tp), dtype=float)
                   - np.asarray(f(u, tm), dtype=float)) / (2.0 * h)
        cols.append(_check_finite(col))
    return np.column_stack(cols)
