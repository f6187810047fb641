"""Rational and floating-point geometric primitives.

Every constraint is stored as ``a.x + b >= 0`` (or ``> 0`` for the rare strict
row).  Polyhedra are immutable; their binary64 mirror is computed once and
cached.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from gmpy2 import mpq, mpz

from .errors import DimensionMismatch, FloatConversionError, FormatError

#: Exact scalar type used throughout the package.
Rational = type(mpq())

FORMAT_VERSION = "1"

# unit roundoff of binary64
_U = 2.0 ** -53


def Q(value) -> Rational:
    """Convert ints, strings ``"p/q"``, Fractions, floats or mpqs to an exact rational."""
    if isinstance(value, Rational):
        return value
    if isinstance(value, str):
        text = value.strip()
        try:
            return mpq(text)
        except ValueError as exc:
            raise FormatError(f"not a rational: {value!r}") from exc
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite float {value!r}")
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, (np.integer,)):
        return mpq(int(value))
    if isinstance(value, np.floating):
        return Q(float(value))
    return mpq(value)


def qvec(values: Iterable) -> tuple:
    return tuple(Q(v) for v in values)


def qstr(x) -> str:
    """Lowest-terms text form, ``p/q`` or ``p``."""
    return str(Q(x))


def to_float_scalar(x) -> float:
    try:
        f = float(x)
    except OverflowError as exc:
        raise FloatConversionError(f"{x} exceeds the binary64 range") from exc
    if not math.isfinite(f):
        raise FloatConversionError(f"{x} exceeds the binary64 range")
    return f


def primitive(values: Sequence) -> tuple:
    """Scale a rational vector by a positive factor to coprime integers."""
    values = [Q(v) for v in values]
    if not any(values):
        return tuple(mpq(0) for _ in values)
    den = mpz(1)
    for v in values:
        d = v.denominator
        den = den * d // math.gcd(int(den), int(d))
    ints = [int(v * den) for v in values]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    return tuple(mpq(v // g) for v in ints)


class Relation(enum.Enum):
    NONSTRICT = ">="
    STRICT = ">"


@dataclass(frozen=True)
class Constraint:
    """One row ``coeffs . x + constant >= 0`` over the rationals."""

    coeffs: tuple
    constant: Rational = mpq(0)
    relation: Relation = Relation.NONSTRICT

    def __post_init__(self):
        object.__setattr__(self, "coeffs", qvec(self.coeffs))
        object.__setattr__(self, "constant", Q(self.constant))

    @property
    def dimension(self) -> int:
        return len(self.coeffs)

    @property
    def is_trivial(self) -> bool:
        return not any(self.coeffs)

    @property
    def is_tautology(self) -> bool:
        if not self.is_trivial:
            return False
        if self.relation is Relation.STRICT:
            return self.constant > 0
        return self.constant >= 0

    @property
    def is_contradiction(self) -> bool:
        return self.is_trivial and not self.is_tautology

    def evaluate(self, point) -> Rational:
        return eval_constraint(self, point)

    def satisfied_by(self, point) -> bool:
        v = self.evaluate(point)
        return v > 0 if self.relation is Relation.STRICT else v >= 0

    def normalized(self) -> "Constraint":
        """Same half-space with coprime integer coefficients."""
        row = primitive(self.coeffs + (self.constant,))
        return Constraint(row[:-1], row[-1], self.relation)

    def nonstrict(self) -> "Constraint":
        return Constraint(self.coeffs, self.constant)

    def to_text(self) -> str:
        return " ".join(qstr(v) for v in self.coeffs + (self.constant,))

    def __str__(self):
        terms = []
        for i, a in enumerate(self.coeffs):
            if a:
                terms.append(f"{qstr(a)}*x{i + 1}")
        if self.constant or not terms:
            terms.append(qstr(self.constant))
        return " + ".join(terms) + f" {self.relation.value} 0"


def eval_constraint(c: Constraint, point) -> Rational:
    """Exact value of ``coeffs . point + constant``."""
    if len(point) != c.dimension:
        raise DimensionMismatch(
            f"point has {len(point)} coordinates, constraint has {c.dimension}")
    total = c.constant
    for a, x in zip(c.coeffs, point):
        if a:
            total += a * Q(x)
    return total


@dataclass(frozen=True)
class FloatPolyhedron:
    """Binary64 rendering ``A x + b >= 0``."""

    A: np.ndarray
    b: np.ndarray

    @property
    def dimension(self) -> int:
        return self.A.shape[1]

    def __len__(self):
        return self.A.shape[0]

    def slacks(self, x) -> np.ndarray:
        return self.A @ np.asarray(x, dtype=float) + self.b

    def normalized(self) -> "FloatPolyhedron":
        norms = np.linalg.norm(self.A, axis=1)
        norms[norms == 0] = 1.0
        return FloatPolyhedron(self.A / norms[:, None], self.b / norms)


class Polyhedron:
    """Immutable conjunction of rational constraints in a fixed dimension.

    Tautologies are dropped on construction; a contradiction row marks the
    polyhedron unsatisfiable and is not stored.
    """

    def __init__(self, dimension: int, rows: Iterable[Constraint] = (), *,
                 unsatisfiable: bool = False):
        kept = []
        for r in rows:
            if not isinstance(r, Constraint):
                r = Constraint(r[:-1], r[-1])
            if r.dimension != dimension:
                raise DimensionMismatch(
                    f"row of length {r.dimension} in dimension {dimension}")
            if r.is_tautology:
                continue
            if r.is_contradiction:
                unsatisfiable = True
                continue
            kept.append(r)
        self._dimension = int(dimension)
        self._rows = tuple(kept)
        self._unsat = bool(unsatisfiable)

    @classmethod
    def from_matrix(cls, A, b) -> "Polyhedron":
        A = [list(r) for r in A]
        dim = len(A[0]) if A else 0
        return cls(dim, [Constraint(r, c) for r, c in zip(A, b)])

    @property
    def dimension(self) -> int:
        return self._dimension

    @property
    def rows(self) -> tuple:
        return self._rows

    @property
    def unsatisfiable(self) -> bool:
        return self._unsat

    def __len__(self):
        return len(self._rows)

    def __iter__(self):
        return iter(self._rows)

    def __getitem__(self, i):
        return self._rows[i]

    def __eq__(self, other):
        # syntactic equality; geometric equality lives in oracle.poly_equal
        if not isinstance(other, Polyhedron):
            return NotImplemented
        return (self._dimension, self._rows, self._unsat) == (
            other._dimension, other._rows, other._unsat)

    def __hash__(self):
        return hash((self._dimension, self._rows, self._unsat))

    def __repr__(self):
        return f"Polyhedron(dimension={self._dimension}, rows={len(self._rows)})"

    @cached_property
    def A(self) -> np.ndarray:
        out = np.empty((len(self._rows), self._dimension), dtype=object)
        for i, r in enumerate(self._rows):
            out[i, :] = r.coeffs
        return out

    @cached_property
    def b(self) -> np.ndarray:
        return np.array([r.constant for r in self._rows], dtype=object)

    @cached_property
    def float_mirror(self) -> FloatPolyhedron:
        return to_float(self)

    def subset(self, indices: Iterable[int]) -> "Polyhedron":
        return Polyhedron(self._dimension, [self._rows[i] for i in indices],
                          unsatisfiable=self._unsat)

    def with_rows(self, rows: Iterable[Constraint]) -> "Polyhedron":
        return Polyhedron(self._dimension, list(self._rows) + list(rows),
                          unsatisfiable=self._unsat)

    def contains(self, point, *, strict: bool = False) -> bool:
        if self._unsat:
            return False
        for r in self._rows:
            v = r.evaluate(point)
            if v < 0 or (v == 0 and (strict or r.relation is Relation.STRICT)):
                return False
        return True

    def normalized(self) -> "Polyhedron":
        """Rows in coprime integer form, duplicates removed, order kept."""
        seen = set()
        rows = []
        for r in self._rows:
            n = r.normalized()
            key = (n.coeffs, n.constant, n.relation)
            if key not in seen:
                seen.add(key)
                rows.append(n)
        return Polyhedron(self._dimension, rows, unsatisfiable=self._unsat)

    def to_text(self) -> str:
        return format_polyhedron(self)


def to_float(p: Polyhedron) -> FloatPolyhedron:
    """Round every rational entry to the nearest binary64."""
    m, d = len(p), p.dimension
    A = np.zeros((m, d))
    b = np.zeros(m)
    for i, r in enumerate(p.rows):
        for j, a in enumerate(r.coeffs):
            A[i, j] = to_float_scalar(a)
        b[i] = to_float_scalar(r.constant)
    return FloatPolyhedron(A, b)


def float_to_rational_point(x) -> tuple:
    return tuple(mpq(float(v)) for v in x)


def dyadic(x, bits: int = 40) -> np.ndarray:
    """Round a float vector to the grid ``2**-bits`` (exact as floats and as rationals)."""
    scale = float(2 ** bits)
    return np.round(np.asarray(x, dtype=float) * scale) / scale


def certified_signs(Gf: np.ndarray, y: np.ndarray):
    """Float evaluation of ``Gf @ y`` with a rigorous error radius.

    ``Gf`` rows must be the correctly rounded images of exact rows scaled by a
    positive factor and ``y`` must be exactly representable.  Returns the
    float values and a boolean mask of entries whose sign is certain.
    """
    vals = Gf @ y
    d = Gf.shape[1] if Gf.ndim == 2 else len(y)
    radius = (d + 4) * 2.0 * _U * (np.abs(Gf) @ np.abs(y)) + 1e-300
    return vals, np.abs(vals) > radius


# --- text format -----------------------------------------------------------

def parse_polyhedron(text: str) -> Polyhedron:
    lines = []
    for raw in text.splitlines():
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        lines.append(s)
    if not lines:
        raise FormatError("empty polyhedron description")
    head = lines[0].split()
    if len(head) != 2:
        raise FormatError(f"header must be '<dimension> <count>', got {lines[0]!r}")
    try:
        dim, count = int(head[0]), int(head[1])
    except ValueError as exc:
        raise FormatError(f"bad header {lines[0]!r}") from exc
    if dim < 0 or count < 0:
        raise FormatError("negative header value")
    body = lines[1:]
    if len(body) != count:
        raise FormatError(f"header announces {count} rows, found {len(body)}")
    rows = []
    for ln in body:
        toks = ln.split()
        if len(toks) != dim + 1:
            raise FormatError(f"row {ln!r} must have {dim + 1} entries")
        vals = [Q(t) for t in toks]
        rows.append(Constraint(vals[:-1], vals[-1]))
    return Polyhedron(dim, rows)


def format_polyhedron(p: Polyhedron) -> str:
    rows = [r.to_text() for r in p.rows]
    if p.unsatisfiable:
        rows.append(" ".join(["0"] * p.dimension + ["-1"]))
    out = [f"{p.dimension} {len(rows)}"] + rows
    return "\n".join(out) + "\n"


def read_polyhedron(path) -> Polyhedron:
    with open(path, encoding="utf-8") as fh:
        return parse_polyhedron(fh.read())
