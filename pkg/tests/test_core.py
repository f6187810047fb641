from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from plpoly.core import (Constraint, Polyhedron, Q, Relation, certified_signs, eval_constraint,
                         format_polyhedron, parse_polyhedron, primitive, to_float)
from plpoly.errors import DimensionMismatch, FloatConversionError, FormatError

bounded = st.integers(-2**63, 2**63 - 1)
nonzero = bounded.filter(bool)


def test_half_converts_exactly():
    p = Polyhedron(1, [Constraint([Q("1/2")], 0)])
    assert to_float(p).A[0, 0] == 0.5


def test_near_ten_loses_accuracy_on_the_way_back():
    exact = Q("100000001/10000000")
    f = to_float(Polyhedron(1, [Constraint([exact], 0)])).A[0, 0]
    assert f == pytest.approx(10.0000001)
    assert Q(f) != exact


def test_empty_polyhedron_converts_to_empty_mirror():
    fp = to_float(Polyhedron(3))
    assert fp.A.shape == (0, 3) and fp.b.shape == (0,)


def test_huge_entry_rejected():
    with pytest.raises(FloatConversionError):
        to_float(Polyhedron(1, [Constraint([Q(10) ** 400], 0)]))


def test_eval_on_boundary_of_sum_row():
    c = Constraint([-1, -1], 7)
    assert eval_constraint(c, (Q("7/2"), Q("7/2"))) == 0


def test_eval_at_origin():
    assert eval_constraint(Constraint([1], 0), (Q(0),)) == 0


def test_strict_row_fails_on_its_hyperplane():
    c = Constraint([0, -2], 3, Relation.STRICT)
    pt = (Q(0), Q("3/2"))
    assert eval_constraint(c, pt) == 0
    assert not c.satisfied_by(pt)
    assert c.nonstrict().satisfied_by(pt)


def test_eval_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        eval_constraint(Constraint([1, 2], 0), (Q(1),))


def test_tautologies_dropped_and_contradictions_flagged():
    p = Polyhedron(2, [Constraint([0, 0], 1), Constraint([1, 0], 0)])
    assert len(p) == 1 and not p.unsatisfiable
    q = Polyhedron(2, [Constraint([0, 0], -1)])
    assert q.unsatisfiable and len(q) == 0


def test_normalized_makes_rows_primitive_and_unique():
    p = Polyhedron(2, [Constraint([Q("1/2"), 1], Q("3/4")), Constraint([2, 4], 3)])
    n = p.normalized()
    assert len(n) == 1
    assert n[0].coeffs == (2, 4) and n[0].constant == 3


def test_primitive_keeps_direction():
    assert primitive([Q("-3/4"), Q("1/2"), 0]) == (-3, 2, 0)
    assert primitive([0, 0]) == (0, 0)


def test_text_round_trip(four_rows):
    text = format_polyhedron(four_rows)
    assert text.splitlines()[0] == "2 4"
    assert parse_polyhedron(text) == four_rows


def test_parse_comments_and_fractions():
    p = parse_polyhedron("# a comment\n1 1\n-1/3 2/7\n")
    assert p[0].coeffs == (Q("-1/3"),) and p[0].constant == Q("2/7")


@pytest.mark.parametrize("text", ["", "2\n1 1 1", "1 2\n1 0\n", "1 1\n1 2 3\n", "1 1\nx 0\n"])
def test_parse_rejects_malformed(text):
    with pytest.raises(FormatError):
        parse_polyhedron(text)


def test_unsatisfiable_round_trips():
    p = Polyhedron(1, [Constraint([1], 0)], unsatisfiable=True)
    assert parse_polyhedron(format_polyhedron(p)).unsatisfiable


def test_contains_strict_and_closed(square):
    assert square.contains((Q(0), Q("1/2")))
    assert not square.contains((Q(0), Q("1/2")), strict=True)
    assert square.contains((Q("1/2"), Q("1/2")), strict=True)


@given(bounded, nonzero, bounded, nonzero)
def test_rational_sum_round_trips(a, b, c, d):
    x, y = Q(a) / b, Q(c) / d
    assert (x + y) - y == x
    assert x == Fraction(a, b)


@given(st.fractions(), st.fractions())
def test_to_float_monotone(x, y):
    fx = to_float(Polyhedron(2, [Constraint([Q(x), 1], 0)])).A[0, 0]
    fy = to_float(Polyhedron(2, [Constraint([Q(y), 1], 0)])).A[0, 0]
    if x <= y:
        assert fx <= fy


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_to_float_idempotent_on_floats(v):
    assert to_float(Polyhedron(2, [Constraint([Q(v), 1], 1)])).A[0, 0] == v


small = st.fractions(min_value=-1000, max_value=1000, max_denominator=1000)


@given(st.lists(small, min_size=4, max_size=4), st.lists(small, min_size=3, max_size=3))
def test_float_sign_agrees_when_clear(row, pt):
    c = Constraint(row[:3], row[3])
    exact = eval_constraint(c, [Q(v) for v in pt])
    approx = float(np.dot([float(v) for v in row[:3]], [float(v) for v in pt]) + float(row[3]))
    magnitude = sum(abs(float(v)) for v in row)
    if abs(approx) > 1e-6 * (1 + magnitude):
        assert (approx > 0) == (exact > 0)


@given(st.lists(st.integers(-10**6, 10**6), min_size=3, max_size=3),
       st.lists(st.integers(-10**6, 10**6), min_size=3, max_size=3))
def test_certified_signs_never_lie(g, y):
    Gf = np.array([g], dtype=float)
    vals, sure = certified_signs(Gf, np.array(y, dtype=float))
    exact = sum(a * b for a, b in zip(g, y))
    if sure[0]:
        assert (vals[0] > 0) == (exact > 0)
