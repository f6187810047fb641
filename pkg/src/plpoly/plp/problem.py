"""Building the parametric LP whose optimal functions are the output faces.

Decision variables are one multiplier per input row followed by a constant
multiplier.  A nonnegative combination of input rows that cancels the
eliminated variables is a valid constraint on the projection; minimizing its
value at a parameter point, subject to the value being 1 at an interior
point, picks out the face that is tightest there.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..core import Polyhedron
from ..errors import DimensionMismatch, EmptyPolyhedron, NoInterior
from ..linalg import ONE, ZERO, independent_rows, qzeros, to_float_matrix
from ..lp import LpProblem, LpStatus, maximize_exact
from ..minimize import exact_interior_point


@dataclass
class PlpProblem:
    """Minimize ``[x; 1]^T objective lambda`` over ``constraints lambda = rhs, lambda >= 0``.

    ``constraint_matrix`` carries the right-hand side as its last column;
    ``objective_matrix`` has one row per parameter plus a constant row and
    the same column layout (its last column is zero).  Parameters are the
    kept coordinates, listed in ``parameters`` by their index in the input
    space.
    """

    constraint_matrix: np.ndarray
    objective_matrix: np.ndarray
    #: interior point of the input, in input coordinates
    normalization_point: tuple
    #: the same point restricted to the parameters; every region is a cone here
    apex: tuple
    parameters: tuple
    kind: str = "projection"
    #: input rows indexed like the multipliers
    sources: tuple = ()
    #: indices of the dependent constraint rows dropped from ``constraint_matrix``
    dropped_rows: tuple = ()
    labels: tuple = field(default_factory=tuple)

    @property
    def n_vars(self) -> int:
        return self.constraint_matrix.shape[1] - 1

    @property
    def n_rows(self) -> int:
        return self.constraint_matrix.shape[0]

    @property
    def n_params(self) -> int:
        return self.objective_matrix.shape[0] - 1

    @property
    def rhs(self) -> np.ndarray:
        return self.constraint_matrix[:, -1]

    @cached_property
    def constraint_matrix_float(self) -> np.ndarray:
        return to_float_matrix(self.constraint_matrix)

    @cached_property
    def objective_matrix_float(self) -> np.ndarray:
        return to_float_matrix(self.objective_matrix)

    def objective_float(self, direction) -> np.ndarray:
        """Cost vector at ``apex + direction``, up to a constant on the feasible set."""
        return self.objective_matrix_float[:-1, :-1].T @ np.asarray(direction, dtype=float)

    def objective_exact(self, direction) -> np.ndarray:
        d = self.n_params
        out = np.empty(self.n_vars, dtype=object)
        for j in range(self.n_vars):
            s = ZERO
            for k in range(d):
                if self.objective_matrix[k, j] and direction[k]:
                    s += self.objective_matrix[k, j] * direction[k]
            out[j] = s
        return out

    def lp_float(self, direction) -> LpProblem:
        A = self.constraint_matrix_float
        return LpProblem(A[:, :-1], A[:, -1], self.objective_float(direction))

    def lp_exact(self, direction) -> LpProblem:
        A = self.constraint_matrix
        return LpProblem(A[:, :-1], A[:, -1].copy(), self.objective_exact(direction))


def _check_nonempty(poly: Polyhedron):
    """Interior point, or the appropriate error for empty / flat inputs."""
    if poly.unsatisfiable:
        raise EmptyPolyhedron("input contains a contradictory row")
    try:
        return exact_interior_point(poly)
    except NoInterior:
        pass
    d = poly.dimension
    G = [[-a for a in r.coeffs] for r in poly.rows]
    h = [r.constant for r in poly.rows]
    status, _, _ = maximize_exact([ZERO] * d, G, h)
    if status is LpStatus.INFEASIBLE:
        raise EmptyPolyhedron("input polyhedron is empty")
    raise NoInterior("input polyhedron has an empty interior")


def _finish(M_rows, O, p, apex, params, kind, sources, labels=()) -> PlpProblem:
    M = np.array(M_rows, dtype=object)
    keep = independent_rows(M)
    dropped = tuple(i for i in range(M.shape[0]) if i not in set(keep))
    return PlpProblem(M[keep], O, tuple(p), tuple(apex), tuple(params), kind,
                      tuple(sources), dropped, tuple(labels))


def construct_projection(poly: Polyhedron, eliminate) -> PlpProblem:
    """Parametric LP for eliminating the coordinates in ``eliminate`` (0-based)."""
    eliminate = sorted(set(int(e) for e in eliminate))
    if not eliminate:
        raise ValueError("nothing to eliminate")
    if eliminate[0] < 0 or eliminate[-1] >= poly.dimension:
        raise DimensionMismatch(f"eliminated index out of range for dimension {poly.dimension}")
    p = _check_nonempty(poly)
    poly = poly.normalized()
    rows = poly.rows
    n = len(rows)
    kept = [j for j in range(poly.dimension) if j not in set(eliminate)]
    slack = [r.evaluate(p) for r in rows]
    M_rows = [slack + [ONE, ONE]]
    for e in eliminate:
        M_rows.append([r.coeffs[e] for r in rows] + [ZERO, ZERO])
    O = qzeros(len(kept) + 1, n + 2)
    for k, j in enumerate(kept):
        for i, r in enumerate(rows):
            O[k, i] = r.coeffs[j]
    for i, r in enumerate(rows):
        O[-1, i] = r.constant
    O[-1, n] = ONE
    apex = [p[j] for j in kept]
    return _finish(M_rows, O, p, apex, kept, "projection", rows)


def construct_hull(p1: Polyhedron, p2: Polyhedron) -> PlpProblem:
    """Parametric LP whose optimal functions describe the closed convex hull.

    The first input must have an interior point (it normalizes the LP); use
    :func:`convex_hull` to get the inputs swapped automatically.
    """
    if p1.dimension != p2.dimension:
        raise DimensionMismatch("hull inputs live in different dimensions")
    p = _check_nonempty(p1)
    try:
        _check_nonempty(p2)
    except NoInterior:
        pass
    p1, p2 = p1.normalized(), p2.normalized()
    m = p1.dimension
    r1, r2 = p1.rows, p2.rows
    n1, n2 = len(r1), len(r2)
    nv = n1 + 1 + n2 + 1
    M_rows = [[r.evaluate(p) for r in r1] + [ONE] + [ZERO] * (n2 + 1) + [ONE]]
    for j in range(m):
        M_rows.append([r.coeffs[j] for r in r1] + [ZERO] + [-r.coeffs[j] for r in r2]
                      + [ZERO, ZERO])
    M_rows.append([r.constant for r in r1] + [ONE] + [-r.constant for r in r2] + [-ONE, ZERO])
    O = qzeros(m + 1, nv + 1)
    for j in range(m):
        for i, r in enumerate(r1):
            O[j, i] = r.coeffs[j]
    for i, r in enumerate(r1):
        O[-1, i] = r.constant
    O[-1, n1] = ONE
    return _finish(M_rows, O, p, p, range(m), "hull", r1 + r2)
