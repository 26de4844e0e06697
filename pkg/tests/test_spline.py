import random
from fractions import Fraction as F

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from bcprm.exactnum import DomainError
from bcprm.spline import (
    GeometricPlan,
    SmoothPlan,
    constraint_residuals,
    evaluate,
    fit,
    locate,
    rationalize,
)

waypoint = st.tuples(st.fractions(-20, 20, max_denominator=16), st.fractions(-20, 20, max_denominator=16))


def distinct_waypoints(min_size=2, max_size=8):
    return st.lists(waypoint, min_size=min_size, max_size=max_size).filter(
        lambda w: all(a != b for a, b in zip(w, w[1:])))


def sympy_spline(ws, j):
    """Independent exact solve: unknowns (alpha, beta, kappa, delta) per piece, equations written out directly."""
    n = len(ws) - 1
    xs = sympy.symbols(f"x0:{4 * n}")
    coef = [xs[4 * i:4 * i + 4] for i in range(n)]
    eqs = []
    for i, (a, b, k, d) in enumerate(coef):
        eqs.append(sympy.Eq(d, sympy.Rational(ws[i][j])))
        eqs.append(sympy.Eq(a + b + k + d, sympy.Rational(ws[i + 1][j])))
    for i in range(n - 1):
        a, b, k, _ = coef[i]
        a2, b2, k2, _ = coef[i + 1]
        eqs.append(sympy.Eq(3 * a + 2 * b + k, k2))
        eqs.append(sympy.Eq(6 * a + 2 * b, 2 * b2))
    eqs.append(sympy.Eq(2 * coef[0][1], 0))
    eqs.append(sympy.Eq(6 * coef[-1][0] + 2 * coef[-1][1], 0))
    sol = sympy.solve(eqs, xs, dict=True)[0]
    return [tuple(F(int(sympy.fraction(sol[v])[0]), int(sympy.fraction(sol[v])[1])) for v in c) for c in coef]


def test_single_piece_is_straight():
    sp = fit(GeometricPlan(((0, 0), (1, 0))))
    assert sp.coefficients(0, 0) == (0, 0, 1, 0)
    assert sp.coefficients(0, 1) == (0, 0, 0, 0)


def test_collinear_equal_spacing_is_linear():
    sp = fit(GeometricPlan(((0, 0), (1, 0), (2, 0))))
    for i in range(2):
        a, b, k, d = sp.coefficients(i, 0)
        assert (a, b, k, d) == (0, 0, 1, i)


def test_matches_independent_exact_solver():
    rnd = random.Random(7)
    for n in (1, 2, 3, 5):
        ws = [(F(rnd.randint(-30, 30), rnd.randint(1, 7)), F(rnd.randint(-30, 30), rnd.randint(1, 7))) for _ in range(n + 1)]
        sp = fit(GeometricPlan(tuple(ws)))
        for j in range(2):
            ref = sympy_spline(ws, j)
            assert [sp.coefficients(i, j) for i in range(n)] == ref


@given(distinct_waypoints())
@settings(max_examples=60, deadline=None)
def test_fit_constraints_hold_exactly(ws):
    sp = fit(GeometricPlan(tuple(ws)))
    assert all(r == 0 for r in constraint_residuals(sp, ws))
    n = sp.n_pieces
    for i, q in enumerate(ws):
        assert evaluate(sp, F(i, n)) == tuple(q)
    assert all(v == 0 for v in evaluate(sp, 1, 2))
    assert all(v == 0 for v in evaluate(sp, 0, 2))


@given(distinct_waypoints(min_size=3))
@settings(max_examples=30, deadline=None)
def test_junction_derivatives_agree(ws):
    sp = fit(GeometricPlan(tuple(ws)))
    for i in range(sp.n_pieces - 1):
        left, right = sp.pieces[i], sp.pieces[i + 1]
        for order in (1, 2):
            l, r = left, right
            for _ in range(order):
                l, r = l.derivative(), r.derivative()
            assert l(1) == r(0)


@given(distinct_waypoints())
@settings(max_examples=30, deadline=None)
def test_dimension_swap_equivariance(ws):
    a = fit(GeometricPlan(tuple(ws)))
    b = fit(GeometricPlan(tuple((y, x) for x, y in ws)))
    for i in range(a.n_pieces):
        assert a.coefficients(i, 0) == b.coefficients(i, 1)
        assert a.coefficients(i, 1) == b.coefficients(i, 0)


@given(st.integers(1, 6), st.fractions(-5, 5, max_denominator=9).filter(bool), st.fractions(-5, 5, max_denominator=9))
def test_equally_spaced_line_is_exact(n, step, offset):
    ws = [(offset + i * step, 2 * offset - i * step) for i in range(n + 1)]
    sp = fit(GeometricPlan(tuple(ws)))
    for i in range(n):
        for j in range(2):
            a, b, _, _ = sp.coefficients(i, j)
            assert a == b == 0


def test_plan_validation():
    with pytest.raises(DomainError):
        GeometricPlan(((0, 0),))
    with pytest.raises(DomainError):
        GeometricPlan(((0, 0), (0, 0), (1, 1)))


def test_locate_and_evaluate_domain():
    assert locate(4, 0) == (0, 0)
    assert locate(4, F(1, 4)) == (0, 1)
    assert locate(4, F(3, 8)) == (1, F(1, 2))
    assert locate(4, 1) == (3, 1)
    sp = fit(GeometricPlan(((0, 0), (1, 0))))
    with pytest.raises(DomainError):
        evaluate(sp, F(5, 4))
    with pytest.raises(DomainError):
        evaluate(sp, 0, order=3)


def test_rationalize_examples():
    ws = ((0, 0), (1, 2), (3, 1))
    sp = fit(GeometricPlan(ws))
    coeffs = [[sp.coefficients(i, j) for j in range(2)] for i in range(2)]
    # dyadic input is already on the grid
    sp_d = fit(GeometricPlan(((0, 0), (1, 0))))
    again = rationalize([[sp_d.coefficients(0, j) for j in range(2)]])
    assert again.pieces == sp_d.pieces
    lin = rationalize([[(0.0, 0.0, 0.3, 0.0), (0.0, 0.0, 0.0, 0.0)]])
    a, b, k, d = lin.coefficients(0, 0)
    assert (1 << 14) % k.denominator == 0 and abs(float(k) - 0.3) <= 2 ** -15
    assert all(r == 0 for r in constraint_residuals(lin, [(0, 0), (k, 0)]))
    zero = rationalize([[(0.0, 0.0, 1.0, 0.0), (0.0, 0.0, 0.0, 0.0)]])
    assert zero.coefficients(0, 1) == (0, 0, 0, 0)
    approx = rationalize([[tuple(float(c) for c in cs) for cs in row] for row in coeffs], ws)
    assert all(r == 0 for r in constraint_residuals(approx, ws))


def test_plan_json_roundtrip():
    sp = fit(GeometricPlan(((0, 0), (1, 2), (3, 1))))
    back = SmoothPlan.from_json(sp.to_json())
    assert back.pieces == sp.pieces
