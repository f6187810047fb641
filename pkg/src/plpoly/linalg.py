"""Dense exact linear algebra over numpy object arrays of ``mpq``."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from gmpy2 import mpq

from .core import Q
from .errors import SingularBasis

ZERO = mpq(0)
ONE = mpq(1)


def qmatrix(rows, cols: int | None = None) -> np.ndarray:
    """Build an object array of rationals from nested sequences."""
    rows = [list(r) for r in rows]
    if not rows:
        return np.empty((0, cols or 0), dtype=object)
    out = np.empty((len(rows), len(rows[0])), dtype=object)
    for i, r in enumerate(rows):
        if len(r) != out.shape[1]:
            raise ValueError("ragged matrix")
        out[i, :] = [Q(v) for v in r]
    return out


def qzeros(rows: int, cols: int) -> np.ndarray:
    out = np.empty((rows, cols), dtype=object)
    out.fill(ZERO)
    return out


def qidentity(n: int) -> np.ndarray:
    out = qzeros(n, n)
    for i in range(n):
        out[i, i] = ONE
    return out


def qmatmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] == 0:
        return qzeros(a.shape[0], b.shape[1] if b.ndim == 2 else 1)
    return a.dot(b)


def to_float_matrix(m: np.ndarray) -> np.ndarray:
    return m.astype(float) if m.size else np.zeros(m.shape)


@dataclass
class EchelonForm:
    matrix: np.ndarray
    #: (row, column) of every pivot that could be placed, in request order
    pivots: list
    #: invertible matrix E with E @ input == matrix
    transform: np.ndarray
    requested: list = field(default_factory=list)

    @property
    def missing(self) -> list:
        placed = {c for _, c in self.pivots}
        return [c for c in self.requested if c not in placed]

    def __iter__(self):
        yield self.matrix
        yield self.pivots


def row_echelon(m: np.ndarray, pivot_cols: Sequence[int] | None = None) -> EchelonForm:
    """Reduced row echelon form with pivots taken in the given column order.

    Pivot choice is the first nonzero entry scanning down the column.  Rows
    without a pivot keep their relative order, with all-zero rows last.
    """
    a = np.array(m, dtype=object, copy=True)
    nrows, ncols = a.shape
    if pivot_cols is None:
        pivot_cols = range(ncols)
    pivot_cols = list(pivot_cols)
    if len(set(pivot_cols)) != len(pivot_cols):
        raise ValueError("pivot columns must be distinct")
    for c in pivot_cols:
        if not 0 <= c < ncols:
            raise IndexError(f"pivot column {c} out of range")
    E = qidentity(nrows)
    pivots = []
    r = 0
    for c in pivot_cols:
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if a[i, c] != 0), None)
        if p is None:
            continue
        if p != r:
            a[[r, p]] = a[[p, r]]
            E[[r, p]] = E[[p, r]]
        inv = ONE / a[r, c]
        if inv != 1:
            a[r] = a[r] * inv
            E[r] = E[r] * inv
        for i in range(nrows):
            if i != r and a[i, c] != 0:
                f = a[i, c]
                a[i] = a[i] - f * a[r]
                E[i] = E[i] - f * E[r]
        pivots.append((r, c))
        r += 1
    # sink zero rows below the unpivoted nonzero ones
    rest = list(range(r, nrows))
    nonzero = [i for i in rest if any(a[i])]
    zero = [i for i in rest if i not in nonzero]
    order = list(range(r)) + nonzero + zero
    return EchelonForm(a[order], pivots, E[order], pivot_cols)


def rank(m: np.ndarray) -> int:
    return len(row_echelon(m).pivots)


def independent_rows(m: np.ndarray) -> list:
    """Indices of a maximal set of linearly independent rows, earliest first."""
    if m.shape[0] == 0:
        return []
    return [c for _, c in row_echelon(m.T.copy()).pivots]


def solve_columns(basis: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Exact solution ``X`` of ``basis @ X == rhs``; raises ``SingularBasis``."""
    n = basis.shape[0]
    if basis.ndim != 2 or basis.shape[1] != n:
        raise ValueError("basis must be square")
    vector = rhs.ndim == 1
    R = rhs.reshape(n, 1) if vector else rhs
    aug = np.empty((n, n + R.shape[1]), dtype=object)
    aug[:, :n] = basis
    aug[:, n:] = R
    for c in range(n):
        p = next((i for i in range(c, n) if aug[i, c] != 0), None)
        if p is None:
            raise SingularBasis(f"basis is singular at column {c}")
        if p != c:
            aug[[c, p]] = aug[[p, c]]
        inv = ONE / aug[c, c]
        if inv != 1:
            aug[c] = aug[c] * inv
        for i in range(n):
            if i != c and aug[i, c] != 0:
                aug[i] = aug[i] - aug[i, c] * aug[c]
    X = aug[:, n:]
    return X[:, 0].copy() if vector else X


def reconstruct_objective(constraints: np.ndarray, objective: np.ndarray,
                          basic_cols: Sequence[int]) -> np.ndarray:
    """Objective matrix rewritten in terms of the nonbasic variables.

    Both matrices share their column layout (variables, then the constant
    column).  With ``theta`` solving ``theta B = objective[:, basic]`` for the
    basis block ``B``, the result is ``objective - theta constraints``; its
    columns on ``basic_cols`` vanish identically.
    """
    basic_cols = list(basic_cols)
    block = constraints[:, basic_cols]
    if block.shape[0] != block.shape[1]:
        raise SingularBasis(
            f"{len(basic_cols)} basic columns for {constraints.shape[0]} constraint rows")
    theta_t = solve_columns(block.T.copy(), objective[:, basic_cols].T.copy())
    return objective - qmatmul(theta_t.T, constraints)
