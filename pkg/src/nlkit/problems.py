"""Built-in benchmark problems.

The small-scale suite is the classical 23-member collection of square
nonlinear systems (Rosenbrock through the Chandrasekhar H-equation), each
with its customary starting point; formulas follow the original FORTRAN
sources. All residuals are written dtype-generically so they evaluate on
dual-number object arrays as well as plain floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Problem
from .sparsity import SparsityPattern


@dataclass(frozen=True)
class ProblemDescriptor:
    id: str
    n: int
    problem: Problem
    reference_solution: np.ndarray = None
    tags: frozenset = frozenset()


def _out(x, n):
    return np.zeros(n, dtype=x.dtype if x.dtype == object else float)


# --- the 23 small-scale systems -------------------------------------------

def _rosenbrock(x, _p):
    out = _out(x, 2)
    out[0] = 1.0 - x[0]
    out[1] = 10.0 * (x[1] - x[0] * x[0])
    return out


def _powell_singular(x, _p):
    out = _out(x, 4)
    out[0] = x[0] + 10.0 * x[1]
    out[1] = math.sqrt(5.0) * (x[2] - x[3])
    out[2] = (x[1] - 2.0 * x[2]) ** 2
    out[3] = math.sqrt(10.0) * (x[0] - x[3]) ** 2
    return out


def _powell_badly_scaled(x, _p):
    out = _out(x, 2)
    out[0] = 1e4 * x[0] * x[1] - 1.0
    out[1] = np.exp(-x[0]) + np.exp(-x[1]) - 1.0001
    return out


def _wood(x, _p):
    out = _out(x, 4)
    out[0] = -200.0 * x[0] * (x[1] - x[0] ** 2) - (1.0 - x[0])
    out[1] = (200.0 * (x[1] - x[0] ** 2) + 20.2 * (x[1] - 1.0)
              + 19.8 * (x[3] - 1.0))
    out[2] = -180.0 * x[2] * (x[3] - x[2] ** 2) - (1.0 - x[2])
    out[3] = (180.0 * (x[3] - x[2] ** 2) + 20.2 * (x[3] - 1.0)
              + 19.8 * (x[1] - 1.0))
    return out


def _helical_valley(x, _p):
    out = _out(x, 3)
    if x[0] > 0:
        angle = np.arctan(x[1] / x[0]) / (2.0 * math.pi)
    elif x[0] < 0:
        angle = np.arctan(x[1] / x[0]) / (2.0 * math.pi) + 0.5
    else:
        angle = 0.25 if x[1] >= 0 else -0.25
    out[0] = 10.0 * (x[2] - 10.0 * angle)
    out[1] = 10.0 * (np.sqrt(x[0] * x[0] + x[1] * x[1]) - 1.0)
    out[2] = x[2]
    return out


def _watson(x, _p):
    # stationarity system of the least-squares Watson objective
    n = len(x)
    out = _out(x, n)
    for i in range(1, 30):
        ti = i / 29.0
        sum1 = 0.0
        temp = 1.0
        for j in range(1, n):
            sum1 = sum1 + j * temp * x[j]
            temp = temp * ti
        sum2 = 0.0
        temp = 1.0
        for j in range(n):
            sum2 = sum2 + temp * x[j]
            temp = temp * ti
        temp1 = sum1 - sum2 * sum2 - 1.0
        temp2 = 2.0 * ti * sum2
        temp = 1.0 / ti
        for k in range(n):
            out[k] = out[k] + temp * (k - temp2) * temp1
            temp = temp * ti
    temp = x[1] - x[0] * x[0] - 1.0
    out[0] = out[0] + x[0] * (1.0 - 2.0 * temp)
    out[1] = out[1] + temp
    return out


def _chebyquad(x, _p):
    # row sums of shifted Chebyshev polynomials minus their integrals
    n = len(x)
    out = _out(x, n)
    for j in range(n):
        t_prev = 1.0
        t_cur = 2.0 * x[j] - 1.0
        scale = 2.0 * t_cur
        for i in range(n):
            out[i] = out[i] + t_cur
            t_next = scale * t_cur - t_prev
            t_prev = t_cur
            t_cur = t_next
    for k in range(n):
        out[k] = out[k] / n
        if (k + 1) % 2 == 0:
            out[k] = out[k] + 1.0 / ((k + 1) ** 2 - 1.0)
    return out


def _brown_almost_linear(x, _p):
    n = len(x)
    out = _out(x, n)
    total = x.sum()
    for k in range(n - 1):
        out[k] = x[k] + total - (n + 1.0)
    out[n - 1] = np.prod(x) - 1.0
    return out


def _discrete_boundary_value(x, _p):
    n = len(x)
    h = 1.0 / (n + 1)
    out = _out(x, n)
    for k in range(n):
        tk = (k + 1) * h
        left = x[k - 1] if k > 0 else 0.0
        right = x[k + 1] if k < n - 1 else 0.0
        out[k] = 2.0 * x[k] - left - right + 0.5 * h * h * (x[k] + tk + 1.0) ** 3
    return out


def _discrete_integral(x, _p):
    n = len(x)
    h = 1.0 / (n + 1)
    t = (np.arange(1, n + 1)) * h
    cubes = [(x[j] + t[j] + 1.0) ** 3 for j in range(n)]
    out = _out(x, n)
    for k in range(n):
        s1 = 0.0
        for j in range(k + 1):
            s1 = s1 + t[j] * cubes[j]
        s2 = 0.0
        for j in range(k + 1, n):
            s2 = s2 + (1.0 - t[j]) * cubes[j]
        out[k] = x[k] + 0.5 * h * ((1.0 - t[k]) * s1 + t[k] * s2)
    return out


def _trigonometric(x, _p):
    n = len(x)
    out = _out(x, n)
    cos_sum = np.cos(x).sum()
    for k in range(n):
        out[k] = n - cos_sum + (k + 1) * (1.0 - np.cos(x[k])) - np.sin(x[k])
    return out


def _variably_dimensioned(x, _p):
    n = len(x)
    weights = np.arange(1, n + 1, dtype=float)
    s = (weights * (x - 1.0)).sum()
    temp = s * (1.0 + 2.0 * s * s)
    out = _out(x, n)
    for k in range(n):
        out[k] = x[k] - 1.0 + (k + 1) * temp
    return out


def _broyden_tridiagonal(x, _p):
    n = len(x)
    out = _out(x, n)
    for k in range(n):
        left = x[k - 1] if k > 0 else 0.0
        right = x[k + 1] if k < n - 1 else 0.0
        out[k] = (3.0 - 2.0 * x[k]) * x[k] - left - 2.0 * right + 1.0
    return out


def _broyden_banded(x, _p):
    n = len(x)
    out = _out(x, n)
    for k in range(n):
        acc = 0.0
        for j in range(max(0, k - 5), min(n, k + 2)):
            if j != k:
                acc = acc + x[j] * (1.0 + x[j])
        out[k] = x[k] * (2.0 + 5.0 * x[k] * x[k]) + 1.0 - acc
    return out


def _matrix_sqrt_2x2(x, _p):
    # X @ X = [[1e-4, 1], [0, 1e-4]], X stored row-major
    out = _out(x, 4)
    out[0] = x[0] * x[0] + x[1] * x[2] - 1e-4
    out[1] = x[0] * x[1] + x[1] * x[3] - 1.0
    out[2] = x[2] * x[0] + x[3] * x[2]
    out[3] = x[2] * x[1] + x[3] * x[3] - 1e-4
    return out


def _matrix_sqrt_3x3(x, _p):
    # X @ X = diag(1e-4) + E12, X stored row-major
    A = np.zeros((3, 3))
    A[0, 0] = A[1, 1] = A[2, 2] = 1e-4
    A[0, 1] = 1.0
    X = x.reshape(3, 3)
    R = X @ X - A
    return R.reshape(-1)


def _dennis_schnabel(x, _p):
    out = _out(x, 2)
    out[0] = x[0] * x[0] + x[1] * x[1] - 2.0
    out[1] = np.exp(x[0] - 1.0) + x[1] ** 3 - 2.0
    return out


def _product_exponential(x, _p):
    # roots along both axes; removable singularities at 0
    out = _out(x, 2)
    if x[0] != 0:
        out[0] = x[1] * x[1] * (1.0 - np.exp(-x[0] * x[0])) / x[0]
    else:
        out[0] = 0.0 * x[1]
    if x[1] != 0:
        out[1] = x[0] * (1.0 - np.exp(-x[1] * x[1])) / x[1]
    else:
        out[1] = 0.0 * x[0]
    return out


def _cubic_radial(x, _p):
    # x * |x|^2: triple-degenerate root at the origin
    r2 = x[0] * x[0] + x[1] * x[1]
    out = _out(x, 2)
    out[0] = x[0] * r2
    out[1] = x[1] * r2
    return out


def _double_root_scalar(x, _p):
    out = _out(x, 1)
    out[0] = x[0] * (x[0] - 5.0) ** 2
    return out


def _freudenstein_roth(x, _p):
    out = _out(x, 2)
    out[0] = -13.0 + x[0] + ((5.0 - x[1]) * x[1] - 2.0) * x[1]
    out[1] = -29.0 + x[0] + ((1.0 + x[1]) * x[1] - 14.0) * x[1]
    return out


def _boggs(x, _p):
    out = _out(x, 2)
    out[0] = x[0] * x[0] - x[1] + 1.0
    out[1] = x[0] - np.cos(0.5 * math.pi * x[1])
    return out


_CHANDRASEKHAR_C = 0.9


def _chandrasekhar(x, _p):
    # H-equation: H_i = (1 - c/(2n) sum_j mu_i H_j / (mu_i + mu_j))^-1
    n = len(x)
    mu = (np.arange(1, n + 1) - 0.5) / n
    A = mu[:, None] / (mu[:, None] + mu[None, :])
    term = (_CHANDRASEKHAR_C / (2.0 * n)) * (A @ x)
    return x - 1.0 / (1.0 - term)


def _bvp_start(n):
    t = np.arange(1, n + 1) / (n + 1.0)
    return t * (t - 1.0)


_SUITE = [
    ("rosenbrock", _rosenbrock, np.array([-1.2, 1.0]),
     np.ones(2), {"small"}),
    ("powell-singular", _powell_singular, np.array([3.0, -1.0, 0.0, 1.0]),
     np.zeros(4), {"small", "ill-conditioned"}),
    ("powell-badly-scaled", _powell_badly_scaled, np.array([0.0, 1.0]),
     None, {"small", "ill-conditioned"}),
    ("wood", _wood, np.array([-3.0, -1.0, -3.0, -1.0]),
     np.ones(4), {"small"}),
    ("helical-valley", _helical_valley, np.array([-1.0, 0.0, 0.0]),
     np.array([1.0, 0.0, 0.0]), {"small"}),
    ("watson", _watson, np.zeros(2), None, {"small"}),
    ("chebyquad", _chebyquad, np.arange(1, 3) / 3.0, None, {"small"}),
    ("brown-almost-linear", _brown_almost_linear, 0.5 * np.ones(10),
     np.ones(10), {"small"}),
    ("discrete-boundary-value", _discrete_boundary_value, _bvp_start(10),
     None, {"small"}),
    ("discrete-integral", _discrete_integral, _bvp_start(10),
     None, {"small"}),
    ("trigonometric", _trigonometric, np.ones(10) / 10.0, None, {"small"}),
    ("variably-dimensioned", _variably_dimensioned,
     1.0 - np.arange(1, 11) / 10.0, np.ones(10), {"small"}),
    ("broyden-tridiagonal", _broyden_tridiagonal, -np.ones(10),
     None, {"small", "sparse"}),
    ("broyden-banded", _broyden_banded, -np.ones(10),
     None, {"small", "sparse"}),
    ("matrix-sqrt-2x2", _matrix_sqrt_2x2, np.array([1.0, 0.0, 0.0, 1.0]),
     np.array([1e-2, 50.0, 0.0, 1e-2]), {"small", "ill-conditioned"}),
    ("matrix-sqrt-3x3", _matrix_sqrt_3x3, np.eye(3).reshape(-1),
     np.array([1e-2, 50.0, 0.0, 0.0, 1e-2, 0.0, 0.0, 0.0, 1e-2]),
     {"small", "ill-conditioned"}),
    ("dennis-schnabel", _dennis_schnabel, np.array([1.0, 2.0]),
     np.ones(2), {"small"}),
    ("product-exponential", _product_exponential, np.array([2.0, 2.0]),
     np.zeros(2), {"small", "ill-conditioned"}),
    ("cubic-radial", _cubic_radial, np.array([3.0, 3.0]),
     np.zeros(2), {"small", "ill-conditioned"}),
    ("double-root-scalar", _double_root_scalar, np.array([1.0]),
     np.zeros(1), {"small"}),
    ("freudenstein-roth", _freudenstein_roth, np.array([6.0, 3.0]),
     np.array([5.0, 4.0]), {"small"}),
    ("boggs", _boggs, np.array([1.0, 0.0]),
     np.array([0.0, 1.0]), {"small"}),
    ("chandrasekhar", _chandrasekhar, np.ones(10), None, {"small"}),
]


def test23(index):
    """The indexed member (1..23) of the small-scale suite."""
    if not 1 <= index <= 23:
        raise IndexError(f"suite index must be in 1..23, got {index}")
    name, fun, start, ref, tags = _SUITE[index - 1]
    prob = Problem(fun, start.copy())
    return ProblemDescriptor(f"test23/{name}", prob.n, prob,
                             None if ref is None else ref.copy(),
                             frozenset(tags))


def generalized_rosenbrock(N=10):
    """Chained Rosenbrock system: f1 = 1 - x1, fi = 10(xi - x_{i-1}^2)."""
    if N < 2:
        raise ValueError("N must be >= 2")

    def fun(x, _p):
        out = _out(x, N)
        out[0] = 1.0 - x[0]
        for i in range(1, N):
            out[i] = 10.0 * (x[i] - x[i - 1] * x[i - 1])
        return out

    start = np.concatenate([[-1.2], np.ones(N - 1)])
    prob = Problem(fun, start)
    return ProblemDescriptor(f"generalized_rosenbrock?N={N}", N, prob,
                             np.ones(N), frozenset({"sparse"}))


def quadratic(p=(2.0, 5.0)):
    """Elementwise square-root problem f(u, p) = u^2 - p."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if np.any(p <= 0):
        raise ValueError("p must be positive elementwise for a real root")

    def fun(u, theta):
        return u * u - theta

    prob = Problem(fun, np.ones(len(p)), params=p)
    return ProblemDescriptor("quadratic", len(p), prob, np.sqrt(p),
                             frozenset({"small"}))


def brusselator_2d(N=8, forcing=5.0):
    """Steady 2-species reaction-diffusion system on a periodic N x N grid.

    State stacks the two fields, dimension 2*N^2. The diffusion coefficient
    10*(N-1)^2 already folds in the grid spacing, so the 5-point stencil is
    applied without a further h^2 division. The circular forcing patch
    amplitude is the single problem parameter.
    """
    if N < 3:
        raise ValueError("N must be >= 3")
    xs = np.arange(N) / (N - 1.0)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    mask = ((X - 0.3) ** 2 + (Y - 0.6) ** 2 <= 0.01).astype(float)
    alpha = 10.0 * (N - 1) ** 2
    nn = N * N

    def fun(state, theta):
        amp = theta[0]
        U = state[:nn].reshape(N, N)
        V = state[nn:].reshape(N, N)
        lap_u = (np.roll(U, 1, 0) + np.roll(U, -1, 0)
                 + np.roll(U, 1, 1) + np.roll(U, -1, 1) - 4.0 * U)
        lap_v = (np.roll(V, 1, 0) + np.roll(V, -1, 0)
                 + np.roll(V, 1, 1) + np.roll(V, -1, 1) - 4.0 * V)
        ru = 1.0 + U * U * V - 4.4 * U + alpha * lap_u + amp * mask
        rv = 3.4 * U - U * U * V + alpha * lap_v
        return np.concatenate([ru.reshape(-1), rv.reshape(-1)])

    u_init = 22.0 * (Y * (1.0 - Y)) ** 1.5
    v_init = 27.0 * (X * (1.0 - X)) ** 1.5
    start = np.concatenate([u_init.reshape(-1), v_init.reshape(-1)])
    # the coupling structure is known analytically: each field equation
    # touches its own 5-point periodic stencil plus the other field's center
    entries = []
    for i in range(N):
        for j in range(N):
            c = i * N + j
            stencil = {c, ((i + 1) % N) * N + j, ((i - 1) % N) * N + j,
                       i * N + (j + 1) % N, i * N + (j - 1) % N}
            for s in stencil:
                entries.append((c, s))          # du/du
                entries.append((nn + c, nn + s))  # dv/dv
            entries.append((c, nn + c))           # du/dv center
            entries.append((nn + c, c))           # dv/du center
    pattern = SparsityPattern(2 * nn, 2 * nn, tuple(entries))
    prob = Problem(fun, start, params=np.array([forcing]),
                   known_pattern=pattern)
    return ProblemDescriptor(f"brusselator2d?N={N}", 2 * nn, prob, None,
                             frozenset({"sparse"}))


def list_problems():
    """All built-in descriptors in stable order."""
    out = [test23(i) for i in range(1, 24)]
    out.append(quadratic())
    out.append(generalized_rosenbrock(10))
    out.append(brusselator_2d(8))
    return out


def get_problem(problem_id):
    """Resolve a CLI-facing id like 'test23/wood' or 'brusselator2d?N=32'."""
    if problem_id.startswith("test23/"):
        key = problem_id.split("/", 1)[1]
        if key.isdigit():
            return test23(int(key))
        for i, (name, *_rest) in enumerate(_SUITE, start=1):
            if name == key:
                return test23(i)
        raise KeyError(f"unknown suite member {key!r}")
    name, _, query = problem_id.partition("?")
    params = {}
    if query:
        for item in query.split("&"):
            k, _, v = item.partition("=")
            params[k] = v
    if name == "quadratic":
        if "p" in params:
            return quadratic(tuple(float(t) for t in params["p"].split(",")))
        return quadratic()
    if name == "generalized_rosenbrock":
        return generalized_rosenbrock(int(params.get("N", 10)))
    if name == "brusselator2d":
        return brusselator_2d(int(params.get("N", 8)))
    raise KeyError(f"unknown problem id {problem_id!r}")
