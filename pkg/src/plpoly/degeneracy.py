"""Primal degeneracy: enumerating every basis of one optimum without overlaps.

When an optimal vertex has basic variables at zero, several bases describe
it and their regions may overlap.  Perturbing the right-hand side by an
infinitesimal multiple of the starting basis matrix makes every basic value
a row vector compared lexicographically; the lexicographic ratio test then
selects a unique neighbour across each frontier, and the regions reached
this way tile the optimum's region.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .checkers import verify_feasible_basis
from .errors import SingularBasis
from .linalg import ONE, ZERO, qidentity
from .lp import BasisPartition


def detect_degenerate(M: np.ndarray, basic: Sequence[int]) -> frozenset:
    """Basic variables whose exact value is zero (empty when nondegenerate)."""
    chk = verify_feasible_basis(M, basic)
    if not chk:
        raise SingularBasis(f"basis is {chk.verdict.value}")
    return frozenset(j for j, v in zip(basic, chk.values) if v == 0)


def lex_compare(v1, v2) -> int:
    """-1, 0 or 1 as ``v1`` is lexicographically below, equal to or above ``v2``."""
    if len(v1) != len(v2):
        raise ValueError("vectors of different lengths")
    for a, b in zip(v1, v2):
        if a != b:
            return -1 if a < b else 1
    return 0


class PerturbationMatrix:
    """Tableau ``B^-1 [A | rhs | B0]``: constraints ``A`` solved for the current basis block ``B``.

    The trailing block starts as the identity at the starting basis ``B0``
    and is row-reduced with everything else; row ``i`` of ``[rhs | block]``
    is the lexicographic value of the ``i``-th basic variable.
    """

    def __init__(self, tableau: np.ndarray, basic: list, n_vars: int):
        self.tableau = tableau
        self.basic = list(basic)
        self.n_vars = n_vars

    @classmethod
    def start(cls, M: np.ndarray, basic: Sequence[int]) -> "PerturbationMatrix":
        chk = verify_feasible_basis(M, basic)
        if not chk:
            raise SingularBasis(f"basis is {chk.verdict.value}")
        k = len(basic)
        T = np.empty((k, M.shape[1] + k), dtype=object)
        T[:, :M.shape[1]] = chk.reduced
        T[:, M.shape[1]:] = qidentity(k)
        return cls(T, list(basic), M.shape[1] - 1)

    @property
    def block(self) -> np.ndarray:
        return self.tableau[:, self.n_vars + 1:]

    def value(self, i: int) -> tuple:
        return tuple(self.tableau[i, self.n_vars:])

    def is_lex_feasible(self) -> bool:
        zero = (ZERO,) * (self.tableau.shape[1] - self.n_vars)
        return all(lex_compare(self.value(i), zero) > 0 for i in range(len(self.basic)))

    def leaving_row(self, entering: int):
        """Row with the lexicographically smallest ratio ``v_i / a_ij`` over ``a_ij > 0``."""
        best, best_ratio = None, None
        for i in range(len(self.basic)):
            a = self.tableau[i, entering]
            if a > 0:
                ratio = tuple(v / a for v in self.value(i))
                if best is None or lex_compare(ratio, best_ratio) < 0:
                    best, best_ratio = i, ratio
        return best

    def pivot(self, row: int, entering: int) -> "PerturbationMatrix":
        T = self.tableau.copy()
        T[row] = T[row] / T[row, entering]
        for i in range(T.shape[0]):
            if i != row and T[i, entering] != 0:
                T[i] = T[i] - T[i, entering] * T[row]
        basic = list(self.basic)
        basic[row] = entering
        return PerturbationMatrix(T, basic, self.n_vars)


class BasisList:
    """Bases waiting to be explored, each explored at most once."""

    def __init__(self):
        self._queue = deque()
        self.explored = set()

    def push(self, tab: PerturbationMatrix):
        if frozenset(tab.basic) not in self.explored:
            self._queue.append(tab)

    def pop(self):
        while self._queue:
            tab = self._queue.popleft()
            key = frozenset(tab.basic)
            if key not in self.explored:
                self.explored.add(key)
                return tab
        return None

    def __bool__(self):
        return bool(self._queue)


@dataclass
class DegeneracyResult:
    #: regions in discovery order (the first one belongs to the starting basis)
    regions: list = field(default_factory=list)
    #: ``(region, frontier, region, frontier)`` pairs sharing a whole facet
    links: list = field(default_factory=list)
    bases: int = 0


def _optimum_vector(plp, tab: PerturbationMatrix) -> tuple:
    """Parametric objective at the tableau's vertex, parameters then constant."""
    objective = plp.objective_matrix
    out = [ZERO] * objective.shape[0]
    for i, j in enumerate(tab.basic):
        v = tab.tableau[i, tab.n_vars]
        if v:
            for k in range(objective.shape[0]):
                out[k] += objective[k, j] * v
    return tuple(out)


def _parametric_columns(plp, tab: PerturbationMatrix, nonbasic) -> list:
    """Nonbasic columns whose reduced objective has a nonzero parameter part."""
    objective = plp.objective_matrix
    d = objective.shape[0] - 1
    out = []
    for j in nonbasic:
        if j >= tab.n_vars:
            continue
        for k in range(d):
            v = objective[k, j] - sum((objective[k, b] * tab.tableau[i, j]
                                       for i, b in enumerate(tab.basic)), ZERO)
            if v != 0:
                out.append(j)
                break
    return out


def explore_degeneracy(plp, basis: BasisPartition, zero_basics=None, *,
                       build: Callable | None = None) -> DegeneracyResult:
    """Breadth-first walk over the bases of one optimum.

    ``build(basis)`` turns a basis into a region (``None`` for a flat one);
    by default regions are built standalone.  Pivots whose leaving row has a
    zero right-hand side stay on the vertex.  The others move to another
    vertex, which is kept only when it yields the very same optimal function
    (possible for the constant function); anything else is left to the main
    loop.
    """
    if build is None:
        from .plp.solver import standalone_builder  # the solver imports this module
        build = standalone_builder(plp)
    M = plp.constraint_matrix
    n_vars = plp.n_vars
    queue = BasisList()
    first = PerturbationMatrix.start(M, basis.basic)
    target = _optimum_vector(plp, first)
    queue.push(first)
    out = DegeneracyResult()
    made = {}
    pending_links = []
    while True:
        tab = queue.pop()
        if tab is None:
            break
        out.bases += 1
        part = BasisPartition.from_basic(tab.basic, n_vars)
        region = build(part)
        made[part.key] = region
        if region is None:
            # a flat cone still lies on the walk; leave it by every column
            # whose reduced cost depends on the parameters
            steps = [(None, j) for j in _parametric_columns(plp, tab, part.nonbasic)]
        else:
            if all(r is not region for r in out.regions):
                out.regions.append(region)
            steps = [(k, j) for k, cols in enumerate(region.columns) for j in cols]
        for k, j in steps:
            r = tab.leaving_row(j)
            if r is None:
                continue
            nxt = tab.pivot(r, j)
            # a move to another vertex stays only if the optimum is unchanged
            if tab.tableau[r, n_vars] != 0 and _optimum_vector(plp, nxt) != target:
                continue
            if region is not None:
                pending_links.append((region, k, frozenset(nxt.basic), tab.basic[r]))
            queue.push(nxt)
    for region, k, key, leaving in pending_links:
        other = made.get(key)
        if other is None or other is region:
            continue
        kb = other.frontier_of_column(leaving)
        if kb is not None:
            out.links.append((region, k, other, kb))
    return out
