"""Sparsity-pattern detection, greedy coloring, compressed Jacobians.

Column compression performs one seeded forward sweep per color (batched
internally in SEED_WIDTH chunks). Row compression is provided for
completeness: without a reverse-mode engine the row sums are obtained from
forward sweeps over all inputs, so its cost model is that of a dense
Jacobian even though the seeded-sweep count equals the number of row colors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff
from .autodiff import DUAL_FORWARD, SEED_WIDTH, forward_sweep
from .errors import DecompressionConflict, NonFiniteValue

COLUMNS = "columns"
ROWS = "rows"


@dataclass(frozen=True)
class SparsityPattern:
    """Structural nonzero set of a Jacobian, 0-indexed, deduplicated."""

    n_rows: int
    n_cols: int
    nonzeros: tuple  # sorted tuple of (row, col) pairs

    def __post_init__(self):
        nz = tuple(sorted(set(map(tuple, self.nonzeros))))
        for r, c in nz:
            if not (0 <= r < self.n_rows and 0 <= c < self.n_cols):
                raise ValueError(f"entry ({r},{c}) outside {self.n_rows}x{self.n_cols}")
        object.__setattr__(self, "nonzeros", nz)

    @property
    def nnz(self):
        return len(self.nonzeros)

    def cols_by_row(self):
        out = [[] for _ in range(self.n_rows)]
        for r, c in self.nonzeros:
            out[r].append(c)
        return out

    def rows_by_col(self):
        out = [[] for _ in range(self.n_cols)]
        for r, c in self.nonzeros:
            out[c].append(r)
        return out

    def mask(self):
        m = np.zeros((self.n_rows, self.n_cols), dtype=bool)
        for r, c in self.nonzeros:
            m[r, c] = True
        return m


@dataclass(frozen=True)
class Coloring:
    """Column or row color assignment; colors are 1-based."""

    axis: str
    color_of: np.ndarray
    num_colors: int

    def __post_init__(self):
        if self.axis not in (COLUMNS, ROWS):
            raise ValueError(f"axis must be {COLUMNS!r} or {ROWS!r}")


@dataclass
class CscMatrix:
    """Compressed-sparse-column matrix with explicit structural pattern."""

    n_rows: int
    n_cols: int
    indptr: np.ndarray
    rowind: np.ndarray
    values: np.ndarray

    @classmethod
    def from_pattern(cls, pattern, values=None):
        order = sorted(range(pattern.nnz),
                       key=lambda k: (pattern.nonzeros[k][1], pattern.nonzeros[k][0]))
        rowind = np.array([pattern.nonzeros[k][0] for k in order], dtype=np.int64)
        colind = np.array([pattern.nonzeros[k][1] for k in order], dtype=np.int64)
        indptr = np.zeros(pattern.n_cols + 1, dtype=np.int64)
        np.add.at(indptr, colind + 1, 1)
        indptr = np.cumsum(indptr)
        vals = np.zeros(pattern.nnz) if values is None else np.asarray(values, dtype=float)
        return cls(pattern.n_rows, pattern.n_cols, indptr, rowind, vals)

    @classmethod
    def from_dense(cls, A):
        A = np.asarray(A, dtype=float)
        rows, cols = np.nonzero(A)
        pat = SparsityPattern(A.shape[0], A.shape[1], tuple(zip(rows, cols)))
        m = cls.from_pattern(pat)
        # fill values column-major to match from_pattern ordering
        vals = []
        for j in range(m.n_cols):
            for k in range(m.indptr[j], m.indptr[j + 1]):
                vals.append(A[m.rowind[k], j])
        m.values = np.array(vals)
        return m

    @property
    def nnz(self):
        return len(self.rowind)

    def to_dense(self):
        A = np.zeros((self.n_rows, self.n_cols))
        for j in range(self.n_cols):
            for k in range(self.indptr[j], self.indptr[j + 1]):
                A[self.rowind[k], j] = self.values[k]
        return A

    def matvec(self, v):
        out = np.zeros(self.n_rows)
        for j in range(self.n_cols):
            lo, hi = self.indptr[j], self.indptr[j + 1]
            if lo < hi:
                out[self.rowind[lo:hi]] += self.values[lo:hi] * v[j]
        return out

    def rmatvec(self, v):
        out = np.zeros(self.n_cols)
        for j in range(self.n_cols):
            lo, hi = self.indptr[j], self.indptr[j + 1]
            if lo < hi:
                out[j] = self.values[lo:hi] @ v[self.rowind[lo:hi]]
        return out

    def diagonal(self):
        d = np.zeros(min(self.n_rows, self.n_cols))
        for j in range(len(d)):
            for k in range(self.indptr[j], self.indptr[j + 1]):
                if self.rowind[k] == j:
                    d[j] = self.values[k]
        return d

    def density(self):
        return self.nnz / float(self.n_rows * self.n_cols)


def detect_pattern_approx(problem, n_samples=3, seed=0):
    """Approximate the Jacobian sparsity pattern from random sample points.

    Takes the union of structural nonzeros of exact dual-mode Jacobians at
    ``n_samples`` perturbations of the initial guess. State-dependent
    branches can defeat this, as can patterns that are zero at every sample;
    duals produce hard zeros so no magnitude threshold is involved.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    u0 = np.asarray(problem.u0, dtype=float)
    n = u0.shape[0]
    rng = np.random.default_rng(seed)
    scale = max(1.0, float(np.max(np.abs(u0))) if n else 1.0)
    entries = set()
    for _ in range(n_samples):
        J = None
        for _attempt in range(3):
            u_s = u0 + scale * rng.uniform(-1.0, 1.0, size=n)
            try:
                J = autodiff.dense_jacobian(problem.residual, u_s, problem.params,
                                            DUAL_FORWARD)
                break
            except NonFiniteValue:
                continue
        if J is None:
            raise NonFiniteValue("sparsity sampling produced non-finite Jacobians "
                                 "3 times in a row")
        rows, cols = np.nonzero(J)
        entries.update(zip(rows.tolist(), cols.tolist()))
    return SparsityPattern(n, n, tuple(entries))


def color_greedy(pattern, axis=COLUMNS):
    """Greedy coloring of the column (row) intersection graph.

    Columns are adjacent iff they share a structural row (rows: a structural
    column). Natural index order, smallest feasible color; deterministic.
    """
    if pattern.nnz == 0:
        raise ValueError("cannot color an empty pattern")
    if axis == COLUMNS:
        groups = pattern.rows_by_col()
        mates = pattern.cols_by_row()
    else:
        groups = pattern.cols_by_row()
        mates = pattern.rows_by_col()
    n = len(groups)
    color = np.zeros(n, dtype=np.int64)
    for j in range(n):
        forbidden = set()
        for r in groups[j]:
            for k in mates[r]:
                if color[k]:
                    forbidden.add(color[k])
        c = 1
        while c in forbidden:
            c += 1
        color[j] = c
    num = int(color.max()) if n else 0
    return Coloring(axis, color, num)


def seed_matrix(pattern, coloring):
    """One seed column per color: the sum of basis vectors sharing it."""
    n = pattern.n_cols if coloring.axis == COLUMNS else pattern.n_rows
    S = np.zeros((n, coloring.num_colors))
    for i in range(n):
        S[i, coloring.color_of[i] - 1] = 1.0
    return S


def _column_owner_map(pattern, coloring):
    """(row, color) -> column map; raises on same-color collisions."""
    owner = {}
    for r, c in pattern.nonzeros:
        key = (r, coloring.color_of[c])
        if key in owner and owner[key] != c:
            raise DecompressionConflict(
                f"columns {owner[key]} and {c} share color {key[1]} and row {r}")
        owner[key] = c
    return owner


def _row_owner_map(pattern, coloring):
    owner = {}
    for r, c in pattern.nonzeros:
        key = (c, coloring.color_of[r])
        if key in owner and owner[key] != r:
            raise DecompressionConflict(
                f"rows {owner[key]} and {r} share color {key[1]} and column {c}")
        owner[key] = r
    return owner


def compressed_jacobian(f, u, theta, pattern, coloring, mode=DUAL_FORWARD):
    """Sparse Jacobian from one seeded sweep per color, decompressed on the
    structural pattern. Values equal the dense Jacobian restricted to it."""
    u = np.asarray(u, dtype=float)
    out = CscMatrix.from_pattern(pattern)
    entry_index = {}
    for j in range(out.n_cols):
        for k in range(out.indptr[j], out.indptr[j + 1]):
            entry_index[(int(out.rowind[k]), j)] = k

    if coloring.axis == COLUMNS:
        owner = _column_owner_map(pattern, coloring)
        seeds = seed_matrix(pattern, coloring)
        parts = _sweep_all(f, u, theta, seeds, mode)
        for (r, color), j in owner.items():
            out.values[entry_index[(r, j)]] = parts[r, color - 1]
        return out

    owner = _row_owner_map(pattern, coloring)
    weights = seed_matrix(pattern, coloring)  # (n_rows, num_colors)
    dense_parts = _sweep_all(f, u, theta, np.eye(pattern.n_cols), mode)
    rowsums = weights.T @ dense_parts  # (num_colors, n_cols)
    for (c, color), r in owner.items():
        out.values[entry_index[(r, c)]] = rowsums[color - 1, c]
    return out


def _sweep_all(f, u, theta, seeds, mode):
    """Evaluate J @ seeds column block, chunked for dual mode."""
    n, w = seeds.shape
    if mode.is_dual:
        parts = np.empty((0, 0))
        blocks = []
        for lo in range(0, w, SEED_WIDTH):
            hi = min(lo + SEED_WIDTH, w)
            _, block = forward_sweep(f, u, theta, seeds[:, lo:hi])
            blocks.append(block)
        return np.hstack(blocks)
    cols = [autodiff.jvp(f, u, theta, seeds[:, k], mode) for k in range(w)]
    return np.column_stack(cols)


def save_pattern(pattern, path):
    """Write a pattern as text: 'n_rows n_cols' then 1-indexed 'row col' lines."""
    with open(path, "w") as fh:
        fh.write(f"{pattern.n_rows} {pattern.n_cols}\n")
        for r, c in pattern.nonzeros:
            fh.write(f"{r + 1} {c + 1}\n")


def load_pattern(path):
    with open(path) as fh:
        header = fh.readline().split()
        n_rows, n_cols = int(header[0]), int(header[1])
        entries = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            r, c = line.split()
            entries.append((int(r) - 1, int(c) - 1))
    return SparsityPattern(n_rows, n_cols, tuple(entries))
