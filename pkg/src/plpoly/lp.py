"""Linear programming in canonical form ``min c.x  s.t.  A x = b, x >= 0``.

Two solvers share one interface.  :func:`float_simplex` is a dense binary64
tableau simplex whose only exported answer is the final basis partition;
:func:`rational_simplex` is the textbook exact simplex with Bland's rule.
:func:`solve_exact` combines them: it asks the float solver for a basis,
re-derives everything from that basis in rational arithmetic, checks
feasibility and optimality exactly and falls back to the rational solver
whenever a check fails.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from gmpy2 import mpq

from .core import Q, Constraint
from .errors import IterationLimit, SingularBasis
from .linalg import ONE, ZERO, qmatrix, qzeros, solve_columns, to_float_matrix

#: Feasibility threshold of the float solver (GLPK's default).
FEASIBILITY_THRESHOLD = 1e-7
_PIVOT_TOL = 1e-9
_DUAL_TOL = 1e-9
_STALL_LIMIT = 50


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class BasisPartition:
    """Basic variables (one per pivoted row, in row order) and the rest."""

    basic: tuple
    nonbasic: tuple

    @classmethod
    def from_basic(cls, basic: Sequence[int], n_vars: int) -> "BasisPartition":
        basic = tuple(int(j) for j in basic)
        chosen = set(basic)
        if len(chosen) != len(basic):
            raise ValueError("repeated basic variable")
        return cls(basic, tuple(j for j in range(n_vars) if j not in chosen))

    @property
    def key(self) -> frozenset:
        return frozenset(self.basic)

    def replace(self, leaving_row: int, entering: int) -> "BasisPartition":
        basic = list(self.basic)
        old = basic[leaving_row]
        basic[leaving_row] = entering
        nonbasic = sorted((set(self.nonbasic) - {entering}) | {old})
        return BasisPartition(tuple(basic), tuple(nonbasic))


@dataclass
class LpProblem:
    """Canonical-form LP; entries may be rationals or floats."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        self.A = np.asarray(self.A)
        if self.A.ndim != 2:
            self.A = self.A.reshape(len(self.b), -1)
        self.b = np.asarray(self.b)
        self.c = np.asarray(self.c)
        m, n = self.A.shape
        if self.b.shape != (m,) or self.c.shape != (n,):
            raise ValueError("inconsistent LP dimensions")

    @classmethod
    def rational(cls, A, b, c) -> "LpProblem":
        A = qmatrix(A) if not (isinstance(A, np.ndarray) and A.dtype == object) else A
        b = np.array([Q(v) for v in b], dtype=object)
        c = np.array([Q(v) for v in c], dtype=object)
        if A.size == 0:
            A = qzeros(len(b), len(c))
        return cls(A, b, c)

    @property
    def shape(self):
        return self.A.shape

    @property
    def is_rational(self) -> bool:
        return self.A.dtype == object

    def as_float(self) -> "LpProblem":
        if not self.is_rational:
            return self
        return LpProblem(to_float_matrix(self.A),
                         np.array([float(v) for v in self.b]),
                         np.array([float(v) for v in self.c]))

    def as_rational(self) -> "LpProblem":
        if self.is_rational:
            return self
        return LpProblem.rational(self.A.tolist(), self.b.tolist(), self.c.tolist())


@dataclass
class LpResult:
    status: LpStatus
    basis: BasisPartition | None = None
    #: exact primal values (rational solvers only)
    x: tuple | None = None
    objective: object = None
    #: exact Farkas ray ``y`` with ``y A <= 0`` and ``y b > 0`` (infeasible only)
    farkas: tuple | None = None
    #: rows found linearly dependent and left without a basic variable
    dropped_rows: tuple = ()
    #: phase-one basis at termination (float solver, infeasible only)
    phase1_basis: tuple | None = None
    via: str = "float"


@dataclass(frozen=True)
class FarkasCertificate:
    """``target = sum(multipliers[i] * others[i]) + slack`` with everything ``>= 0``."""

    multipliers: tuple
    slack: object = ZERO

    def verify(self, target: Constraint, others: Sequence[Constraint]) -> bool:
        if len(self.multipliers) != len(others):
            return False
        if self.slack < 0 or any(m < 0 for m in self.multipliers):
            return False
        coeffs = [ZERO] * target.dimension
        const = self.slack
        for m, c in zip(self.multipliers, others):
            if m:
                for j, a in enumerate(c.coeffs):
                    coeffs[j] += m * a
                const += m * c.constant
        return tuple(coeffs) == target.coeffs and const == target.constant


# --- floating-point tableau simplex ------------------------------------------

@dataclass
class _FloatOutcome:
    status: LpStatus
    basis: list
    active: np.ndarray
    x: np.ndarray | None
    phase1_basis: tuple | None = None
    iterations: int = 0


def _float_core(A, b, c, *, tol=FEASIBILITY_THRESHOLD, max_iter=None,
                stop_after=None) -> _FloatOutcome:
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    # equilibrate rows, then columns; neither changes which bases are optimal
    rs = np.abs(A).max(axis=1) if n else np.ones(m)
    rs[rs == 0] = 1.0
    A = A / rs[:, None]
    b = b / rs
    cs = np.abs(A).max(axis=0) if m else np.ones(n)
    cs[cs == 0] = 1.0
    A = A / cs
    c = c / cs
    sign = np.where(b < 0, -1.0, 1.0)
    T = np.zeros((m, n + m + 1))
    T[:, :n] = A * sign[:, None]
    T[:, n:n + m] = np.eye(m)
    T[:, -1] = b * sign
    basis = list(range(n, n + m))
    active = np.ones(m, dtype=bool)
    obj = np.zeros(n + m + 1)
    obj[:n] = -T[:, :n].sum(axis=0)
    obj[-1] = -T[:, -1].sum()
    allowed = np.ones(n + m, dtype=bool)
    if max_iter is None:
        max_iter = 50 * (n + m) + 200
    counter = [0]

    def pivot(r, j):
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        nz = np.nonzero(col)[0]
        if nz.size:
            T[nz] -= np.outer(col[nz], T[r])
        if obj[j] != 0.0:
            obj[:] -= obj[j] * T[r]
        basis[r] = j

    def run(limit=None):
        stall = 0
        steps = 0
        while True:
            d = obj[:-1]
            cand = np.nonzero(allowed & (d < -_DUAL_TOL))[0]
            if cand.size == 0:
                return LpStatus.OPTIMAL
            if limit is not None and steps >= limit:
                return LpStatus.OPTIMAL
            if stall > _STALL_LIMIT:
                j = int(cand[0])
            else:
                j = int(cand[np.argmin(d[cand])])
            col = T[:, j]
            ok = active & (col > _PIVOT_TOL)
            if not ok.any():
                return LpStatus.UNBOUNDED
            rows = np.nonzero(ok)[0]
            ratios = np.maximum(T[rows, -1], 0.0) / col[rows]
            rmin = ratios.min()
            ties = rows[ratios <= rmin + 1e-12 * max(1.0, abs(rmin))]
            r = int(min(ties, key=lambda i: basis[i]))
            pivot(r, j)
            stall = stall + 1 if rmin <= 1e-12 else 0
            steps += 1
            counter[0] += 1
            if counter[0] > max_iter:
                raise IterationLimit(f"no convergence after {max_iter} pivots")

    status = run()
    scale = max(1.0, float(np.abs(T[:, -1]).max(initial=0.0)))
    if status is not LpStatus.OPTIMAL or -obj[-1] > tol * scale:
        return _FloatOutcome(LpStatus.INFEASIBLE, list(basis), active, None,
                             tuple(basis), counter[0])
    # drive artificial variables out of the basis
    for r in range(m):
        if basis[r] >= n:
            row = np.abs(T[r, :n])
            j = int(np.argmax(row)) if n else 0
            if n and row[j] > _PIVOT_TOL:
                pivot(r, j)
            else:
                active[r] = False
    allowed[n:] = False
    obj[:] = 0.0
    obj[:n] = c
    for r in range(m):
        if active[r] and basis[r] < n and c[basis[r]] != 0.0:
            obj[:] -= c[basis[r]] * T[r]
    status = run(stop_after)
    x = np.zeros(n)
    for r in range(m):
        if active[r]:
            x[basis[r]] = T[r, -1]
    return _FloatOutcome(status, list(basis), active, x / cs, None, counter[0])


def _float_outcome_to_result(out: _FloatOutcome, n: int) -> LpResult:
    if out.status is LpStatus.INFEASIBLE:
        return LpResult(LpStatus.INFEASIBLE, phase1_basis=out.phase1_basis, via="float")
    basic = [out.basis[r] for r in range(len(out.basis)) if out.active[r]]
    dropped = tuple(r for r in range(len(out.basis)) if not out.active[r])
    return LpResult(out.status, BasisPartition.from_basic(basic, n),
                    dropped_rows=dropped, via="float")


def float_simplex(problem: LpProblem, *, tol: float = FEASIBILITY_THRESHOLD,
                  max_iter: int | None = None, stop_after: int | None = None) -> LpResult:
    """Two-phase Dantzig simplex in binary64; exports the final partition only.

    ``stop_after`` truncates phase two after that many pivots and reports the
    current basis as optimal.  It exists for fault-injection tests.
    """
    p = problem.as_float()
    out = _float_core(p.A, p.b, p.c, tol=tol, max_iter=max_iter, stop_after=stop_after)
    return _float_outcome_to_result(out, p.A.shape[1])


def float_solve_values(problem: LpProblem, *, tol: float = FEASIBILITY_THRESHOLD):
    """Status and float primal values, for callers that need a float point."""
    p = problem.as_float()
    out = _float_core(p.A, p.b, p.c, tol=tol)
    return out.status, out.x


# --- exact tableau simplex ---------------------------------------------------

def rational_simplex(problem: LpProblem, *, max_iter: int | None = None) -> LpResult:
    """Exact two-phase simplex with Bland's rule."""
    p = problem.as_rational()
    A, b, c = p.A, p.b, p.c
    m, n = A.shape
    sign = [(-1 if v < 0 else 1) for v in b]
    T = qzeros(m, n + m + 1)
    for i in range(m):
        T[i, :n] = A[i] * sign[i] if sign[i] < 0 else A[i]
        T[i, n + i] = ONE
        T[i, -1] = b[i] * sign[i]
    basis = list(range(n, n + m))
    active = [True] * m
    obj = qzeros(1, n + m + 1)[0]
    for i in range(m):
        obj[:n] -= T[i, :n]
        obj[-1] -= T[i, -1]
    allowed = [True] * (n + m)
    if max_iter is None:
        max_iter = 10 ** 6

    def pivot(r, j):
        T[r] = T[r] / T[r, j]
        for i in range(m):
            if i != r and T[i, j] != 0:
                T[i] = T[i] - T[i, j] * T[r]
        if obj[j] != 0:
            obj[:] = obj - obj[j] * T[r]
        basis[r] = j

    def run():
        it = 0
        while True:
            j = next((k for k in range(n + m) if allowed[k] and obj[k] < 0), None)
            if j is None:
                return LpStatus.OPTIMAL
            best = None
            for i in range(m):
                if active[i] and T[i, j] > 0:
                    ratio = T[i, -1] / T[i, j]
                    if best is None or ratio < best[0] or (
                            ratio == best[0] and basis[i] < basis[best[1]]):
                        best = (ratio, i)
            if best is None:
                return LpStatus.UNBOUNDED
            pivot(best[1], j)
            it += 1
            if it > max_iter:
                raise IterationLimit("rational simplex iteration cap")

    run()
    if obj[-1] != 0:
        # phase-one optimum positive: y_k = 1 - reduced cost of artificial k
        y = tuple((ONE - obj[n + i]) * sign[i] for i in range(m))
        return LpResult(LpStatus.INFEASIBLE, farkas=y, via="rational")
    for r in range(m):
        if basis[r] >= n:
            j = next((k for k in range(n) if T[r, k] != 0), None)
            if j is None:
                active[r] = False
            else:
                pivot(r, j)
    for k in range(n, n + m):
        allowed[k] = False
    obj[:] = ZERO
    obj[:n] = c
    for r in range(m):
        if active[r] and c[basis[r]] != 0:
            obj[:] = obj - c[basis[r]] * T[r]
    status = run()
    if status is LpStatus.UNBOUNDED:
        return LpResult(LpStatus.UNBOUNDED, via="rational")
    x = [ZERO] * n
    for r in range(m):
        if active[r]:
            x[basis[r]] = T[r, -1]
    basic = [basis[r] for r in range(m) if active[r]]
    return LpResult(LpStatus.OPTIMAL, BasisPartition.from_basic(basic, n), tuple(x),
                    -obj[-1], dropped_rows=tuple(r for r in range(m) if not active[r]),
                    via="rational")


# --- exact verification of float answers ---------------------------------------

def _verify_optimal(p: LpProblem, res: LpResult) -> LpResult | None:
    A, b, c = p.A, p.b, p.c
    m, n = A.shape
    rows = [r for r in range(m) if r not in set(res.dropped_rows)]
    basic = list(res.basis.basic)
    if len(basic) != len(rows):
        return None
    try:
        B = A[np.ix_(rows, basic)] if rows else qzeros(0, 0)
        xb = solve_columns(B, b[rows]) if rows else np.empty(0, dtype=object)
    except SingularBasis:
        return None
    if any(v < 0 for v in xb):
        return None
    x = [ZERO] * n
    for j, v in zip(basic, xb):
        x[j] = v
    xv = np.array(x, dtype=object)
    if m and n:
        if any(v != bv for v, bv in zip(A.dot(xv), b)):
            return None
    elif any(bv != 0 for bv in b):
        return None
    if rows:
        y = solve_columns(B.T.copy(), c[basic])
        reduced = c - A[rows].T.dot(y)
    else:
        reduced = c
    if any(v < 0 for v in reduced):
        return None
    obj = sum((c[j] * x[j] for j in basic), ZERO)
    return LpResult(LpStatus.OPTIMAL, res.basis, tuple(x), obj,
                    dropped_rows=res.dropped_rows, via="float+exact")


def _verify_infeasible(p: LpProblem, res: LpResult) -> LpResult | None:
    if res.phase1_basis is None:
        return None
    A, b = p.A, p.b
    m, n = A.shape
    sign = [(-1 if v < 0 else 1) for v in b]
    cols = []
    costs = []
    for j in res.phase1_basis:
        if j < n:
            cols.append([A[i, j] * sign[i] for i in range(m)])
            costs.append(ZERO)
        else:
            e = [ZERO] * m
            e[j - n] = ONE
            cols.append(e)
            costs.append(ONE)
    B = qmatrix(cols).T.copy()
    try:
        y = solve_columns(B.T.copy(), np.array(costs, dtype=object))
    except SingularBasis:
        return None
    y = [y[i] * sign[i] for i in range(m)]
    yv = np.array(y, dtype=object)
    if n and any(v > 0 for v in yv.dot(A)):
        return None
    if sum((yi * bi for yi, bi in zip(y, b)), ZERO) <= 0:
        return None
    return LpResult(LpStatus.INFEASIBLE, farkas=tuple(y), via="float+exact")


def _dual_repair(p: LpProblem, res: LpResult) -> LpResult | None:
    """Exact dual simplex from a float basis whose reduced costs are exactly sound.

    Degenerate float optima often come back with a basic value that is a
    rounding error below zero.  When the reduced costs are nonnegative the
    basis is dual feasible and a few exact dual pivots (smallest index
    first, which rules out cycling) settle the problem.
    """
    if res.dropped_rows or res.basis is None:
        return None
    A, b, c = p.A, p.b, p.c
    m, n = A.shape
    basic = list(res.basis.basic)
    if len(basic) != m or m == 0:
        return None
    B = A[:, basic]
    rhs = np.empty((m, n + m + 1), dtype=object)
    rhs[:, :n] = A
    rhs[:, n:n + m] = qzeros(m, m)
    for i in range(m):
        rhs[i, n + i] = ONE
    rhs[:, -1] = b
    try:
        T = solve_columns(B, rhs)
    except SingularBasis:
        return None
    d = c - np.array([c[j] for j in basic], dtype=object).dot(T[:, :n])
    if any(v < 0 for v in d):
        return None
    for _ in range(10 * (n + m) + 100):
        neg = [i for i in range(m) if T[i, -1] < 0]
        if not neg:
            x = [ZERO] * n
            for i, j in enumerate(basic):
                x[j] = T[i, -1]
            obj = sum((c[j] * x[j] for j in basic), ZERO)
            return LpResult(LpStatus.OPTIMAL, BasisPartition.from_basic(basic, n),
                            tuple(x), obj, via="float+dual")
        r = min(neg, key=lambda i: basic[i])
        best = None
        for j in range(n):
            a = T[r, j]
            if a < 0:
                ratio = d[j] / -a
                if best is None or ratio < best[0]:
                    best = (ratio, j)
        if best is None:
            # row r reads (nonnegative combination) = negative value
            y = tuple(-v for v in T[r, n:n + m])
            return LpResult(LpStatus.INFEASIBLE, farkas=y, via="float+dual")
        j = best[1]
        T[r] = T[r] / T[r, j]
        for i in range(m):
            if i != r and T[i, j] != 0:
                T[i] = T[i] - T[i, j] * T[r]
        if d[j] != 0:
            d = d - d[j] * T[r, :n]
        basic[r] = j
    return None


FloatSolver = Callable[[LpProblem], LpResult]


def solve_exact(problem: LpProblem, *, float_solver: FloatSolver | None = float_simplex,
                stats: dict | None = None) -> LpResult:
    """Exact answer, trying a float basis first and checking it rationally."""
    p = problem.as_rational()
    if float_solver is not None:
        try:
            guess = float_solver(p)
        except IterationLimit:
            guess = None
        if guess is not None:
            checked = None
            if guess.status is LpStatus.OPTIMAL and guess.basis is not None:
                checked = _verify_optimal(p, guess) or _dual_repair(p, guess)
            elif guess.status is LpStatus.INFEASIBLE:
                checked = _verify_infeasible(p, guess)
            if checked is not None:
                if stats is not None:
                    stats["exact_float_hits"] = stats.get("exact_float_hits", 0) + 1
                return checked
    if stats is not None:
        stats["rational_fallbacks"] = stats.get("rational_fallbacks", 0) + 1
    return rational_simplex(p)


# --- inequality-form helpers ---------------------------------------------------

def _ineq_canonical(c, G, h, E=None, f=None, rational=False):
    """``max c.z  s.t.  G z <= h, E z = f`` with free ``z`` as a canonical LP."""
    G = np.asarray(G, dtype=object if rational else float)
    k = G.shape[1] if G.ndim == 2 and G.size else len(c)
    G = G.reshape(len(h), k)
    mg = G.shape[0]
    if E is None:
        E = np.zeros((0, k), dtype=object if rational else float)
        f = []
    E = np.asarray(E, dtype=object if rational else float).reshape(len(f), k)
    me = E.shape[0]
    nv = 2 * k + mg
    zero = ZERO if rational else 0.0
    one = ONE if rational else 1.0
    A = np.empty((mg + me, nv), dtype=object if rational else float)
    A.fill(zero)
    A[:mg, :k] = G
    A[:mg, k:2 * k] = -G
    for i in range(mg):
        A[i, 2 * k + i] = one
    A[mg:, :k] = E
    A[mg:, k:2 * k] = -E
    rhs = list(h) + list(f)
    cc = [-v for v in c] + list(c) + [zero] * mg
    if rational:
        return LpProblem(A, np.array([Q(v) for v in rhs], dtype=object),
                         np.array([Q(v) for v in cc], dtype=object)), k
    return LpProblem(A, np.array(rhs, dtype=float), np.array(cc, dtype=float)), k


def maximize_float(c, G, h, E=None, f=None, *, tol=FEASIBILITY_THRESHOLD):
    """Float ``max c.z`` over ``G z <= h, E z = f``; returns (status, z, value)."""
    prob, k = _ineq_canonical(np.asarray(c, float), G, h, E, f)
    try:
        status, x = float_solve_values(prob, tol=tol)
    except IterationLimit:
        return LpStatus.INFEASIBLE, None, None
    if status is not LpStatus.OPTIMAL:
        return status, None, None
    z = x[:k] - x[k:2 * k]
    return status, z, float(np.dot(c, z))


def maximize_exact(c, G, h, E=None, f=None, *, float_solver=float_simplex):
    """Exact ``max c.z`` over ``G z <= h, E z = f``; returns (status, z, value)."""
    c = [Q(v) for v in c]
    prob, k = _ineq_canonical(c, qmatrix(G) if len(G) else np.zeros((0, len(c)), dtype=object),
                              [Q(v) for v in h],
                              None if E is None else qmatrix(E),
                              None if f is None else [Q(v) for v in f], rational=True)
    res = solve_exact(prob, float_solver=float_solver)
    if res.status is not LpStatus.OPTIMAL:
        return res.status, None, None
    z = tuple(res.x[i] - res.x[k + i] for i in range(k))
    return res.status, z, sum((ci * zi for ci, zi in zip(c, z)), ZERO)


# --- Farkas combinations ---------------------------------------------------------

@dataclass
class Entailment:
    """Outcome of testing whether ``others`` imply ``target``."""

    certificate: FarkasCertificate | None
    #: homogeneous point ``(x, x0)`` with ``x0 >= 0`` satisfying every other row
    #: (``a.x + b x0 >= 0``) and violating the target, when not entailed
    ray: tuple | None = None

    @property
    def entailed(self) -> bool:
        return self.certificate is not None

    def witness(self, interior=None):
        """Affine witness point, if one can be produced exactly."""
        if self.ray is None:
            return None
        *zx, z0 = self.ray
        if z0 > 0:
            return tuple(v / z0 for v in zx)
        return None


def entailment(target: Constraint, others: Sequence[Constraint], *,
               float_solver: FloatSolver | None = float_simplex) -> Entailment:
    d = target.dimension
    r = len(others)
    A = np.empty((d + 1, r + 1), dtype=object)
    if r:
        A[:, :r] = np.array([c.coeffs + (c.constant,) for c in others], dtype=object).T
    A[:, r] = ZERO
    A[d, r] = ONE
    rhs = np.array(list(target.coeffs) + [target.constant], dtype=object)
    prob = LpProblem(A, rhs, np.array([ZERO] * (r + 1), dtype=object))
    res = solve_exact(prob, float_solver=float_solver)
    if res.status is LpStatus.OPTIMAL:
        cert = FarkasCertificate(tuple(res.x[:r]), res.x[r])
        if not cert.verify(target, others):
            raise AssertionError("Farkas certificate failed exact re-multiplication")
        return Entailment(cert)
    y = res.farkas
    return Entailment(None, tuple(-v for v in y))


def farkas_combination(target: Constraint, others: Sequence[Constraint], *,
                       float_solver: FloatSolver | None = float_simplex
                       ) -> FarkasCertificate | None:
    """Nonnegative multipliers deriving ``target`` from ``others``, or ``None``."""
    return entailment(target, others, float_solver=float_solver).certificate
