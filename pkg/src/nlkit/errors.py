"""Exception types shared across the solver toolkit."""


class NlkitError(Exception):
    """Base class for all toolkit errors."""


class NonFiniteValue(NlkitError):
    """A residual, iterate, or derivative contained NaN or Inf."""


class SingularMatrix(NlkitError):
    """A direct factorization hit a pivot too small to trust."""


class RankDeficient(NlkitError):
    """QR factorization detected a (numerically) rank-deficient matrix."""


class NotPositiveDefinite(NlkitError):
    """Cholesky factorization hit a nonpositive pivot."""


class ZeroPivot(NlkitError):
    """ILU(0) hit an exactly zero diagonal pivot."""


class KrylovBreakdown(NlkitError):
    """GMRES basis construction broke down before convergence."""


class LinearSolveFailed(NlkitError):
    """A linear sub-solve failed inside an outer iteration."""


class LineSearchFailed(NlkitError):
    """Backtracking exhausted its budget without sufficient decrease."""


class DecompressionConflict(NlkitError):
    """Two same-colored columns (rows) are structural in one row (column)."""


class IncompatibleSpec(NlkitError):
    """An algorithm specification combines mutually incompatible blocks."""


class InvalidBracket(NlkitError):
    """A bracketing interval does not straddle a sign change."""
