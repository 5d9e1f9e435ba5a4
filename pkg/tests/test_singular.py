from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings, strategies as st

from polyseries.ode import LinearODE
from polyseries.singular import (analyze, apparent_check, find_singular_points, fuchs_sum_check,
                                 indicial_exponents, local_basis, multiplicity, render_report)


def test_multiplicity():
    assert multiplicity([0, 0, 1, -4], [0, 1]) == 2
    assert multiplicity([1, -8, 16], [1, -4]) == 2
    assert multiplicity([1, 1], [1, -4]) == 0


def test_exponential_irregular_at_infinity(toy_odes):
    pts = find_singular_points(toy_odes["exp"])
    assert len(pts) == 1 and pts[0].is_infinity and not pts[0].regular
    with pytest.raises(ValueError):
        indicial_exponents(toy_odes["exp"], pts[0])


def test_geometric_points(toy_odes):
    ode = toy_odes["geometric"]
    pts = find_singular_points(ode)
    assert [p.label() for p in pts] == ["x - 1", "infinity"]
    assert all(p.regular for p in pts)
    assert indicial_exponents(ode, pts[0]).values == (Fr(-1),)
    assert indicial_exponents(ode, pts[1]).values == (Fr(1),)
    reports, fuchs = analyze(ode)
    assert fuchs == (0, 0, True)
    assert "sum = 0, expected = 0" in render_report(reports, fuchs)


def hypergeometric(A, B, C):
    """4 x (1 - x) F'' + (2C - (2A + 2B + 4) x) F' - A B F with a = A/2, b = B/2, c = C/2."""
    return LinearODE.from_lists([[-A * B], [2 * C, -(2 * A + 2 * B + 4)], [0, 4, -4]])


@settings(max_examples=25, deadline=None)
@given(st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6))
def test_hypergeometric_exponents_and_fuchs(A, B, C):
    a, b, c = Fr(A, 2), Fr(B, 2), Fr(C, 2)
    ode = hypergeometric(A, B, C)
    pts = {p.label(): p for p in find_singular_points(ode)}
    assert set(pts) == {"x", "x - 1", "infinity"}
    got = {k: indicial_exponents(ode, p) for k, p in pts.items()}
    assert all(len(e) == 2 for e in got.values())
    assert sorted(got["x"].values) == sorted([Fr(0), 1 - c])
    assert sorted(got["x - 1"].values) == sorted([Fr(0), c - a - b])
    assert sorted(got["infinity"].values) == sorted([a, b])
    lhs, rhs, ok = fuchs_sum_check([(e, 1) for e in got.values()], 2, 2)
    assert ok and rhs == 1


def test_repeated_exponent_gives_log():
    ode = hypergeometric(1, 1, 2)            # c = 1: exponents 0, 0 at x = 0
    x0 = find_singular_points(ode)[0]
    basis = local_basis(ode, x0, truncation=6)
    assert sorted(s.log_degree for s in basis) == [0, 1]
    v = apparent_check(ode, x0)
    assert v.verdict == "genuine" and v.forced_log


def test_apparent_point():
    # x F'' - 2 F' = 0 has solutions 1 and x^3
    ode = LinearODE.from_lists([[0], [-2], [0, 1]])
    x0 = find_singular_points(ode)[0]
    assert indicial_exponents(ode, x0).values == (Fr(0), Fr(3))
    v = apparent_check(ode, x0)
    assert v.verdict == "apparent" and not v.forced_log
    basis = local_basis(ode, x0, truncation=5)
    assert [s.log_degree for s in basis] == [0, 0]


def test_resonance_without_log_is_genuine_when_negative():
    # x F'' + 2 F' = 0: solutions 1 and 1/x, exponents -1, 0
    ode = LinearODE.from_lists([[0], [2], [0, 1]])
    x0 = find_singular_points(ode)[0]
    v = apparent_check(ode, x0)
    assert v.verdict == "genuine" and not v.distinct_nonneg


def test_non_rational_exponent_reported_numerically():
    # (1 + x^2) F' - F = 0: at x = -i the exponent is 1/(-2i) = i/2
    import mpmath
    ode = LinearODE.from_lists([[-1], [1, 0, 1]])
    pt = find_singular_points(ode)[0]
    assert pt.degree == 2
    e = indicial_exponents(ode, pt)
    assert not e.exact and len(e) == 1
    assert abs(e.values[0] - mpmath.mpc(0, 0.5)) < 1e-30


def test_quadratic_point_exact_rational():
    # (1 + x^2) F' - 2x F = 0 (F = 1 + x^2): exponent 1 at both roots
    ode = LinearODE.from_lists([[0, -2], [1, 0, 1]])
    pt = find_singular_points(ode)[0]
    e = indicial_exponents(ode, pt)
    assert e.exact and e.values == (Fr(1),)
    assert apparent_check(ode, pt).verdict == "apparent"
