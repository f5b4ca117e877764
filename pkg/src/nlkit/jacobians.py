"""Jacobian acquisition strategies shared by all outer-iteration drivers.

A JacobianSpec says how the Jacobian is obtained (analytic callback, dense
forward differentiation, colored sparse sweeps, or a matrix-free operator);
bind() attaches it to a concrete problem and a counting residual so that
materializations and directional derivatives are tallied.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import SimpleNamespace

import numpy as np

from . import autodiff, linalg, sparsity
from .autodiff import DUAL_FORWARD, FD_FORWARD, DiffMode


@dataclass(frozen=True)
class JacobianSpec:
    """How to obtain the Jacobian of the residual.

    kind: "analytic" | "dual_dense" | "fd_dense" | "colored_sparse"
    | "matrix_free" | "quasi_newton" (the last is handled by the
    newton-family driver, not here).
    """

    kind: str = "dual_dense"
    mode: DiffMode = DUAL_FORWARD
    pattern_source: str = "auto"  # "auto" | "known" | "detect"
    detect_samples: int = 3
    detect_seed: int = 0
    qn: object = None  # quasinewton.QuasiNewtonConfig when kind="quasi_newton"

    def __post_init__(self):
        kinds = ("analytic", "dual_dense", "fd_dense", "colored_sparse",
                 "matrix_free", "quasi_newton")
        if self.kind not in kinds:
            raise ValueError(f"unknown jacobian kind {self.kind!r}")

    @property
    def materializes(self):
        return self.kind in ("analytic", "dual_dense", "fd_dense",
                             "colored_sparse")


ANALYTIC = JacobianSpec("analytic")
DUAL_DENSE = JacobianSpec("dual_dense")
FD_DENSE = JacobianSpec("fd_dense", mode=FD_FORWARD)
COLORED_SPARSE = JacobianSpec("colored_sparse")
MATRIX_FREE = JacobianSpec("matrix_free")


def bind(spec, problem, fn, stats):
    """Attach a JacobianSpec to a problem; fn is the counted residual."""
    if spec.kind == "analytic":
        if problem.analytic_jacobian is None:
            raise ValueError("problem has no analytic_jacobian")
        return _AnalyticJac(problem, stats)
    if spec.kind in ("dual_dense", "fd_dense"):
        return _DenseJac(fn, problem.params, spec.mode, stats)
    if spec.kind == "colored_sparse":
        return _ColoredJac(spec, problem, fn, stats)
    if spec.kind == "matrix_free":
        return _MatrixFreeJac(spec, problem, fn, stats)
    raise ValueError(f"cannot bind jacobian kind {spec.kind!r}")


class _AnalyticJac:
    materializes = True

    def __init__(self, problem, stats):
        self._jac = problem.analytic_jacobian
        self._params = problem.params
        self.stats = stats

    def materialize(self, u):
        self.stats.njac += 1
        return np.asarray(self._jac(u, self._params), dtype=float)


class _DenseJac:
    materializes = True

    def __init__(self, fn, params, mode, stats):
        self._fn = fn
        self._params = params
        self._mode = mode
        self.stats = stats

    def materialize(self, u):
        self.stats.njac += 1
        return autodiff.dense_jacobian(self._fn, u, self._params, self._mode)


class _ColoredJac:
    materializes = True

    def __init__(self, spec, problem, fn, stats):
        self._spec = spec
        self._problem = problem
        self._fn = fn
        self._params = problem.params
        self.stats = stats
        self._pattern = None
        self._coloring = None

    def _prepare(self):
        if self._pattern is None:
            known = self._problem.known_pattern
            source = self._spec.pattern_source
            if source == "known" and known is None:
                raise ValueError("pattern_source='known' but the problem "
                                 "carries no known_pattern")
            if known is not None and source in ("known", "auto"):
                self._pattern = known
            else:
                proxy = SimpleNamespace(residual=self._fn,
                                        u0=self._problem.u0,
                                        params=self._params)
                self._pattern = sparsity.detect_pattern_approx(
                    proxy, self._spec.detect_samples, self._spec.detect_seed)
                # detection builds one dense Jacobian per sample
                self.stats.njac += self._spec.detect_samples
            self._coloring = sparsity.color_greedy(self._pattern, sparsity.COLUMNS)
        return self._pattern, self._coloring

    def materialize(self, u):
        pattern, coloring = self._prepare()
        self.stats.njac += 1
        return sparsity.compressed_jacobian(self._fn, u, self._params,
                                            pattern, coloring, self._spec.mode)


class _MatrixFreeJac:
    materializes = False

    def __init__(self, spec, problem, fn, stats):
        self._spec = spec
        self._problem = problem
        self._fn = fn
        self._params = problem.params
        self.stats = stats
        self._concrete = _ColoredJac(spec, problem, fn, stats)

    def operator(self, u):
        u = np.asarray(u, dtype=float).copy()

        def apply(v):
            self.stats.njvp += 1
            return autodiff.jvp(self._fn, u, self._params, v, self._spec.mode)

        return linalg.LinearOperator(n=len(u), apply=apply)

    def materialize(self, u):
        """Concrete Jacobian for preconditioning (concrete_jac path)."""
        return self._concrete.materialize(u)
