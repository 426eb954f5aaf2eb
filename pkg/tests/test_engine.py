import random
from fractions import Fraction

import pytest

from conftest import exact_integral, hpoly_to_sympy, sympy_equal
from isocubic.engine import (
    LambdaOutOfRange,
    LevelExceeded,
    AbelianReport,
    abelian_report,
    assemble_abelian,
    base_generators,
    base_integrals,
    extend_level,
    form_builder,
    moment_integral,
    reduce,
    seed_table,
    synthesize,
    synthesize_detailed,
    table_for,
)
from isocubic.exactmath import HPoly, SurdScalar, count_positive_roots
from isocubic.perturbation import (
    CMVParameters,
    Perturbation,
    ZeroParameter,
    cmv_vector_field,
    normalize_cmv,
    three_cycle_system,
)

LAMS = [Fraction(1, 3), Fraction(1, 2), Fraction(2, 7)]


def lin(lam, c0, c1=0):
    """The polynomial c0 + c1 h with rational coefficients (no pi)."""
    return HPoly([SurdScalar(c0, 0, 0, lam=lam), SurdScalar(c1, 0, 0, lam=lam)], lam)


# -- closed forms against the trig-moment oracle ----------------------------

@pytest.mark.parametrize("lam", LAMS)
def test_base_generators_match_oracle(lam):
    for (kind, k), p in base_generators(lam).items():
        i = 0 if kind == "P" else 1
        assert sympy_equal(hpoly_to_sympy(p, lam), exact_integral(i, k, lam)), (kind, k)


def test_closed_form_shapes():
    lam = Fraction(1, 3)
    g = base_generators(lam)
    assert g[("P", 2)] == g[("Q", 2)]
    assert g[("P", 1)].degree == 1 and g[("Q", 3)].degree == 3
    assert all(c.pi == 1 for p in g.values() for c in p.coeffs if not c.is_zero())


def test_orientation_makes_area_negative():
    # oint y dx is minus the enclosed area for a counterclockwise loop
    assert base_generators(Fraction(1, 2))[("P", 1)].coefficient(1).sign() == -1


@pytest.mark.parametrize("m", range(5))
def test_moment_integral(m):
    lam = Fraction(1, 3)
    p = moment_integral(2 * m, lam)
    assert p.degree == m + 1
    assert sympy_equal(hpoly_to_sympy(p, lam), exact_integral(2 * m, 1, lam))


def test_moment_integral_rejects_odd():
    with pytest.raises(ValueError):
        moment_integral(3, Fraction(1, 2))


def test_odd_moments_vanish():
    t = table_for(Fraction(1, 2), 8)
    for i in (1, 3, 5, 7):
        assert t.reduce(i, 1).is_zero()


@pytest.mark.parametrize("lam", [Fraction(1, 3), Fraction(3, 4)])
def test_table_matches_oracle(lam):
    t = table_for(lam, 8)
    for i in range(8):
        for j in range(8 - i):
            assert sympy_equal(hpoly_to_sympy(t.reduce(i, j), lam), exact_integral(i, j, lam)), (i, j)


# -- the five small relations ------------------------------------------------

def relations(lam):
    t = table_for(lam, 6)
    P = lambda k: t.reduce(0, k)
    Q = lambda k: t.reduce(1, k)
    L = lam
    rhs = {
        (2, 1): P(2).scale(-1 / (2 * L)),
        (2, 2): P(1) * lin(L, 0, Fraction(1, 7)) + P(2).scale(-(L + 6) / (7 * L))
        + P(3).scale(-2 / (3 * L)),
        (3, 2): P(1) * lin(L, 0, Fraction(-3, 14)) + P(2).scale(-3 / (14 * L))
        + P(3).scale(2 / (3 * L)) + Q(2).scale((3 * L + 14) / (14 * L)) + Q(3).scale(-2 / (3 * L)),
        (4, 1): P(1) * lin(L, 0, -1 / (28 * L)) + P(2).scale(3 / (14 * L * L))
        + P(3).scale(1 / (3 * L * L)) + Q(2).scale((L + 7) / (28 * L * L)),
        (2, 3): P(1) * lin(L, 0, (42 * L - 37) / 210)
        + P(2) * lin(L, (42 * L - 37) / (210 * L), Fraction(28, 210))
        + P(3).scale(-28 * (L - 1) / (45 * L)) + P(4).scale(-3 / (4 * L))
        + Q(3).scale((2 * L - 7) / (5 * L))
        + Q(2) * lin(L, -(42 * L * L + 159 * L - 196) / (210 * L), Fraction(-504, 210)),
    }
    return t, rhs


@pytest.mark.parametrize("lam", LAMS)
def test_five_relations_exact(lam):
    t, rhs = relations(lam)
    for (i, j), expected in rhs.items():
        assert t.reduce(i, j) == expected, (i, j)


# -- structure ---------------------------------------------------------------

def test_degree_pattern():
    # nonzero I_{i,j} has degree exactly j + floor(i/2), never above i + j
    t = table_for(Fraction(2, 5), 10)
    for i in range(10):
        for j in range(1, 10 - i):
            p = t.reduce(i, j)
            if not p.is_zero():
                assert p.degree == j + i // 2 <= i + j
                assert p.coefficient(0).is_zero()


def test_generators_vanish_to_first_order():
    t = table_for(Fraction(1, 3), 9)
    for k in range(2, 10):
        assert t.reduce(0, k).degree == k and t.reduce(0, k).coefficient(1).is_zero()


def test_every_form_is_pi_s_graded():
    t = table_for(Fraction(1, 3), 8)
    for p in t.entries().values():
        for c in p.coeffs:
            assert c.is_zero() or (c.pi == 1 and c.rat == 0)


def test_recurrence_identity_vanishes():
    fb = form_builder(Fraction(1, 3))
    t = table_for(Fraction(1, 3), 9)
    from isocubic.engine import evaluate_form
    for i in range(4):
        for L in range(1, 6 - i):
            assert evaluate_form(fb.identity(i, L), t.generators, fb.lam).is_zero(), (i, L)


def test_extend_level_from_seed_matches_closed_forms():
    lam = Fraction(2, 7)
    seed = seed_table(lam)
    t = extend_level(extend_level(seed))
    assert t.level == seed.level + 2
    for k in range(1, t.level + 1):
        assert t.generator("P", k) == table_for(lam, t.level).generator("P", k)


def test_base_integrals_is_level_three():
    t = base_integrals(Fraction(1, 2))
    assert t.level == 3 and t.is_complete()


def test_level_exceeded():
    t = extend_level(base_integrals(Fraction(1, 2)))
    assert t.level == 4
    with pytest.raises(LevelExceeded):
        reduce(t, (0, 5))
    with pytest.raises(LevelExceeded):
        t.generator("Q", 5)


def test_lambda_range():
    for bad in (Fraction(0), Fraction(1), Fraction(3, 2)):
        with pytest.raises(LambdaOutOfRange):
            table_for(bad, 3)


def test_float_lambda_close_to_exact():
    exact = table_for(Fraction(1, 2), 6).reduce(2, 3)
    approx = table_for(0.5, 6).reduce(2, 3)
    for a, b in zip(exact.coeffs, approx.coeffs):
        assert abs(float(a.surd) - float(b.surd)) <= 1e-12 * max(1.0, abs(float(a.surd)))


def test_reduction_table_json():
    obj = base_integrals(Fraction(1, 2)).to_json()
    assert obj["level"] == 3 and obj["lambda"] == "1/2"
    assert set(obj["generators"]) == {"P1", "P2", "P3", "Q2", "Q3"}


# -- assembly --------------------------------------------------------------------

def test_linearity():
    rng = random.Random(3)
    lam = Fraction(1, 3)

    def rand_pert():
        idx = [(i, j) for i in range(5) for j in range(5 - i)]
        return Perturbation(4, {k: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for k in idx},
                            {k: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for k in idx})

    p, q = rand_pert(), rand_pert()
    c = Fraction(-7, 3)
    lhs = assemble_abelian(p + q.scaled(c), lam)
    assert lhs == assemble_abelian(p, lam) + assemble_abelian(q, lam).scale(c)


def test_dy_terms_match_dx_form():
    # oint x^2 y dy = -2/2 oint x y^2 dx
    lam = Fraction(1, 3)
    via_a = assemble_abelian(Perturbation(3, a={(2, 1): 1}), lam)
    via_b = assemble_abelian(Perturbation(3, b={(1, 2): 1}), lam)
    assert via_a == via_b


def test_pure_y_terms_do_not_contribute():
    lam = Fraction(1, 2)
    assert assemble_abelian(Perturbation(3, a={(0, 1): 5, (0, 3): 2}, b={(3, 0): 1}), lam).is_zero()


def test_assembly_against_oracle():
    lam = Fraction(1, 2)
    pert = Perturbation(3, a={(1, 1): 2, (3, 0): Fraction(1, 3)}, b={(0, 1): -1, (2, 1): 4})
    # I = oint g dx - f dy, with oint x^i y^j dy = -i/(j+1) oint x^(i-1) y^(j+1) dx
    ref = -exact_integral(0, 1, lam) + 4 * exact_integral(2, 1, lam) \
        + 2 * Fraction(1, 2) * exact_integral(0, 2, lam) \
        + Fraction(1, 3) * 3 * exact_integral(2, 1, lam)
    assert sympy_equal(hpoly_to_sympy(assemble_abelian(pert, lam), lam), ref)


@pytest.mark.parametrize("n", range(1, 7))
def test_abelian_degree_and_origin(n):
    rng = random.Random(n)
    idx = [(i, j) for i in range(n + 1) for j in range(n + 1 - i)]
    pert = Perturbation(n, {k: rng.randint(-5, 5) for k in idx}, {k: rng.randint(-5, 5) for k in idx})
    p = assemble_abelian(pert, Fraction(1, 3))
    assert p.degree <= n and p.coefficient(0).is_zero()


def test_report_round_trip():
    rep = abelian_report(three_cycle_system(), Fraction(1, 2))
    again = AbelianReport.from_json(rep.to_json())
    assert again.to_json() == rep.to_json()
    assert rep.roots.count == 3


# -- synthesis -------------------------------------------------------------------

def test_synthesis_hits_targets():
    lam = Fraction(1, 2)
    zeros = [Fraction(1, 3), Fraction(1, 2)]
    p = assemble_abelian(synthesize(zeros, lam), lam)
    r = count_positive_roots(p)
    assert r.exact == zeros


def test_synthesis_fallback_pivots():
    lam = Fraction(1, 3)
    zeros = [Fraction(1, 5), Fraction(3, 4), Fraction(2)]
    res = synthesize_detailed(zeros, lam, exclude=[("b", 0, 3)])
    assert ("b", 0, 3) not in res.pivots
    assert any(piv[1] == 1 for piv in res.pivots)
    assert count_positive_roots(assemble_abelian(res.perturbation, lam)).exact == zeros


def test_synthesis_rejects_bad_targets():
    with pytest.raises(ValueError):
        synthesize([Fraction(1, 2), Fraction(1, 2)], Fraction(1, 2))
    with pytest.raises(ValueError):
        synthesize([Fraction(-1)], Fraction(1, 2))
    with pytest.raises(ValueError):
        synthesize([Fraction(1, 2)], 0.5)


# -- normal form -----------------------------------------------------------------

def test_normalize_lambda():
    nf = normalize_cmv(CMVParameters(1, 2, 3, 4))
    assert 0 < nf.lam < 1


def test_normalize_rejects_zero_parameter():
    with pytest.raises(ZeroParameter):
        normalize_cmv(CMVParameters(1, 0, 3, 4))


def test_normalize_conjugates_vector_field():
    k = CMVParameters(Fraction(3, 2), Fraction(-2), Fraction(5, 3), Fraction(7, 4))
    nf = normalize_cmv(k)
    lam = nf.lam
    x, y = 0.137, -0.0891
    # x1 = a X, y1 = b Y, tau = T t, so dx1/dtau = a X'(t) / T
    X, Y = x / nf.x_scale, y / nf.y_scale
    u, v = cmv_vector_field(k, X, Y)
    fx = -y / lam - x - x * x
    fy = x + 3 * lam * x * x + 2 * lam * x ** 3 + y + 2 * x * y
    assert abs(u * nf.x_scale / nf.time_scale - fx) < 1e-12
    assert abs(v * nf.y_scale / nf.time_scale - fy) < 1e-12


def test_level_three_generators_reachable():
    t = base_integrals(Fraction(1, 2))
    assert t.reduce(1, 3) == t.generator("Q", 3)
    with pytest.raises(LevelExceeded):
        t.reduce(2, 2)
