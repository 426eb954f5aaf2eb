from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from isocubic.exactmath import (
    ContextMismatch,
    ExactMatrix,
    GradeError,
    HPoly,
    MixedGrade,
    SingularMatrix,
    SurdScalar,
    count_positive_roots,
    count_positive_roots_float,
    determinant,
    parse_lambda,
    parse_surd,
    poly_antiderivative,
    poly_arith,
    poly_derivative,
    scalar_arith,
    solve_exact,
    squarefree_decomposition,
)

HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def S(a, b=0, pi=0, lam=THIRD):
    return SurdScalar(a, b, pi, lam=lam)


# -- scalars ---------------------------------------------------------------

def test_identity_times_s():
    assert scalar_arith(S(1, 0, lam=HALF), S(0, 1, lam=HALF), "mul") == S(0, 1, lam=HALF)


def test_s_squared_at_half():
    sq = S(0, 1, lam=HALF) * S(0, 1, lam=HALF)
    assert sq.rat == Fraction(1, 4) and sq.surd == 0


def test_pi_graded_sum():
    a = S(0, 1, 1, lam=HALF)
    assert (a + a) == S(0, 2, 1, lam=HALF)


def test_pi_squared_rejected():
    with pytest.raises(GradeError):
        S(0, 1, 1) * S(1, 0, 1)


def test_mixed_grade_sum_rejected():
    with pytest.raises(GradeError):
        S(1, 0, 1) + S(1, 0, 0)


def test_zero_is_grade_neutral():
    assert S(0, 0, 0) + S(2, 1, 1) == S(2, 1, 1)


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        S(1, 1) / S(0, 0)


def test_context_mismatch():
    with pytest.raises(ContextMismatch):
        S(1, 0, lam=HALF) + S(1, 0, lam=THIRD)


def test_inverse_in_field():
    x = S(Fraction(3, 7), Fraction(-2, 5))
    assert x * x.inverse() == S(1)


def test_rational_surd_collapses_equality():
    # lam = 1/2 gives s = 1/2, so 1/2 + 0 s equals 0 + 1 s
    assert S(HALF, 0, lam=HALF) == S(0, 1, lam=HALF)
    assert hash(S(HALF, 0, lam=HALF)) == hash(S(0, 1, lam=HALF))


def test_sign_of_surd_combination():
    # s = sqrt(2)/3 at lam = 1/3: 1 - 2s > 0, 1 - 3s < 0
    assert S(1, -2).sign() == 1
    assert S(1, -3).sign() == -1


def test_surd_serialization_round_trip():
    x = S(Fraction(-3, 4), Fraction(5, 6), 1)
    assert x.to_str() == "-3/4 + 5/6*s [pi^1]"
    assert parse_surd(x.to_str(), THIRD) == x
    assert parse_surd("1/2 + 3*s", THIRD) == S(HALF, 3)


def test_parse_lambda_modes():
    assert parse_lambda("2/7") == Fraction(2, 7)
    assert isinstance(parse_lambda("0.3"), float)


@settings(max_examples=60, deadline=None)
@given(st.tuples(rationals, rationals), st.tuples(rationals, rationals), st.tuples(rationals, rationals))
def test_field_axioms(a, b, c):
    x, y, z = S(*a), S(*b), S(*c)
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x
    if not y.is_zero():
        assert (x / y) * y == x


# -- polynomials -----------------------------------------------------------

def h(k, lam=THIRD):
    return HPoly.monomial(S(1, lam=lam), k, lam)


def test_poly_sum_and_shift():
    assert poly_arith(h(1), h(2), "add") == HPoly([0, 1, 1], THIRD)
    assert poly_arith(HPoly([1], THIRD), 1, "shift_by_h_power") == h(1)


def test_poly_scale_componentwise():
    c = S(0, 2, 1)
    assert poly_arith(h(2), c, "scale").coefficient(2) == c


def test_degrees_add_under_mul():
    assert (HPoly([1, 2], THIRD) * HPoly([0, 0, 3], THIRD)).degree == 3


def test_antiderivative_examples():
    assert poly_antiderivative(HPoly([0, 0, 3], THIRD)) == h(3)
    assert poly_antiderivative(HPoly.zero(THIRD)).is_zero()
    c = S(0, 5, 1)
    assert poly_antiderivative(HPoly([c], THIRD)) == HPoly([0, c], THIRD)


def test_derivative_examples():
    assert poly_derivative(h(3)) == HPoly([0, 0, 3], THIRD)
    assert poly_derivative(HPoly([7], THIRD)).is_zero()
    assert poly_derivative(h(1)) == HPoly([1], THIRD)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(rationals, rationals), max_size=7))
def test_derivative_inverts_antiderivative(cs):
    p = HPoly([S(a, b, 1) for a, b in cs], THIRD)
    assert poly_derivative(poly_antiderivative(p)) == p


def test_hpoly_json_round_trip():
    p = HPoly([0, S(0, -2, 1), S(0, Fraction(7, 3), 1)], THIRD)
    assert HPoly.from_json(p.to_json(), THIRD) == p


def test_rationalize_mixed_grade():
    with pytest.raises(MixedGrade):
        HPoly([S(1, 0, 0), S(0, 1, 1)], THIRD).rationalize()


# -- linear algebra ----------------------------------------------------------

def test_solve_identity():
    rhs = [S(1, 2), S(-3, 0), S(0, 5)]
    eye = ExactMatrix([[1, 0, 0], [0, 1, 0], [0, 0, 1]], THIRD)
    assert solve_exact(eye, rhs) == rhs


def test_solve_diag_two_s():
    m = ExactMatrix([[S(2), S(0)], [S(0), S(0, 1)]], THIRD)
    assert solve_exact(m, [S(2), S(0, 1)]) == [S(1), S(1)]


def test_singular_detected():
    m = ExactMatrix([[S(1, 1), S(2, 2)], [S(3, 0), S(6, 0)]], THIRD)
    m2 = ExactMatrix([[S(1), S(2)], [S(2), S(4)]], THIRD)
    with pytest.raises(SingularMatrix):
        solve_exact(m2, [S(1), S(1)])
    # rows proportional only through the surd part: (1+s)*6 - (2+2s)*3 = 0
    assert determinant(m)[0].is_zero()
    with pytest.raises(SingularMatrix):
        solve_exact(m, [S(1), S(0)])


def test_pi_graded_solve():
    m = ExactMatrix([[S(0, 2, 1), S(0)], [S(0), S(0, 3, 1)]], THIRD)
    x = solve_exact(m, [S(0, 4, 1), S(0, 3, 1)])
    assert x == [S(2), S(1)] and all(v.pi == 0 for v in x)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.data())
def test_solve_round_trip(n, data):
    entries = data.draw(st.lists(st.tuples(rationals, rationals), min_size=n * n, max_size=n * n))
    xs = data.draw(st.lists(st.tuples(rationals, rationals), min_size=n, max_size=n))
    m = ExactMatrix([[S(*entries[r * n + c]) for c in range(n)] for r in range(n)], THIRD)
    x = [S(*v) for v in xs]
    if determinant(m)[0].is_zero():
        return
    assert solve_exact(m, m.apply(x)) == x


def test_determinant_matches_sympy():
    rows = [[S(1, 2), S(0, 1), S(3)], [S(-1), S(2, -1), S(0, 4)], [S(5, 1), S(1), S(-2, 3)]]
    val, pi = determinant(ExactMatrix(rows, THIRD))
    s = sp.sqrt(sp.Rational(2, 9))
    ref = sp.Matrix([[sp.Rational(e.rat) + sp.Rational(e.surd) * s for e in r] for r in rows]).det()
    assert pi == 0
    assert sp.simplify(sp.Rational(val.rat) + sp.Rational(val.surd) * s - ref) == 0


# -- roots -------------------------------------------------------------------

def pis_poly(coeffs, lam=HALF):
    return HPoly([S(0, c, 1, lam=lam) for c in coeffs], lam)


def test_two_positive_zeros():
    # h (h - 1/2)(h - 1/3) = h^3 - 5/6 h^2 + 1/6 h
    r = count_positive_roots(pis_poly([0, Fraction(1, 6), Fraction(-5, 6), 1]))
    assert r.count == 2
    for (lo, hi), z in zip(r.intervals, [THIRD, HALF]):
        assert lo <= z <= hi and hi - lo < Fraction(1, 10 ** 6)


def test_root_at_origin_excluded():
    assert count_positive_roots(pis_poly([0, 1])).count == 0


def test_three_certified_zeros():
    r = count_positive_roots(pis_poly([0, -4, 55, Fraction(-325, 2), 125]))
    assert r.count == 3
    assert r.exact == [Fraction(1, 10), Fraction(2, 5), Fraction(4, 5)]


def test_multiplicity_reported():
    # (h - 1)^2 (h - 2)^3 (h + 1)
    p = sp.Poly(sp.expand((sp.Symbol("x") - 1) ** 2 * (sp.Symbol("x") - 2) ** 3 * (sp.Symbol("x") + 1)))
    coeffs = [Fraction(int(c)) for c in reversed(p.all_coeffs())]
    r = count_positive_roots(coeffs)
    assert r.count == 2 and r.multiplicities == [2, 3] and r.exact == [1, 2]


def test_squarefree_factors():
    fac = squarefree_decomposition([Fraction(c) for c in (-1, 1, 1, -1)])  # -(h-1)^2 (h+1)
    assert sorted(k for _, k in fac) == [1, 2]


def test_irrational_roots_isolated():
    r = count_positive_roots([Fraction(-2), 0, Fraction(1)])
    (lo, hi), = r.intervals
    assert r.exact == [None] and lo < 2 ** 0.5 < hi


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=2, max_size=9))
def test_sturm_count_vs_scan(cs):
    import numpy as np

    coeffs = [Fraction(c) for c in cs]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) < 2 or all(c == 0 for c in coeffs):
        return
    r = count_positive_roots(coeffs)
    # every distinct positive real root from numpy must sit in one interval
    roots = np.roots([float(c) for c in reversed(coeffs)])
    real = sorted({round(z.real, 6) for z in roots if abs(z.imag) < 1e-7 and z.real > 1e-9})
    if len(real) == r.count:
        for z, (lo, hi) in zip(real, r.intervals):
            assert float(lo) - 1e-5 <= z <= float(hi) + 1e-5
    # a sign-change scan on 10^4 points never finds more odd-multiplicity roots
    odd = sum(1 for m in r.multiplicities if m % 2)
    hmax = float(max(hi for _, hi in r.intervals)) + 1 if r.intervals else 10.0
    grid = np.linspace(1e-9, hmax, 10 ** 4)
    vals = np.polynomial.polynomial.polyval(grid, [float(c) for c in coeffs])
    flips = int(np.sum(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0))
    assert flips <= odd


def test_float_fallback_matches():
    p = pis_poly([0, -4, 55, Fraction(-325, 2), 125])
    r = count_positive_roots_float(p)
    assert r.count == 3
