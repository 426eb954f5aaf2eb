"""Hand-derived small-n expressions, used as independent cross-checks of the
reduction engine.

The coefficients of I(h) for n <= 4 written directly in terms of the xi_{i,j},
the generator form of I(h) for n <= 4, and the Jacobian determinant
d(alpha_1..alpha_3)/d(xi_{0,1..3}).
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Tuple

from .exactmath import ExactMatrix, HPoly, SurdScalar, determinant, is_exact
from .engine import ReductionTable, assemble_abelian, table_for
from .perturbation import Perturbation


def half_power(lam, a2: int, b2: int, c=1) -> SurdScalar:
    """c * pi * lam^(a2/2) * (1-lam)^(-b2/2) for odd a2, b2, in the s-basis.

    lam^(a+1/2) (1-lam)^-(b+1/2) = lam^a (1-lam)^-(b+1) * s.
    """
    if a2 % 2 == 0 or b2 % 2 == 0:
        raise ValueError("half_power expects odd doubled exponents")
    one = Fraction(1) if is_exact(lam) else 1.0
    u = one - lam
    a, b = (a2 - 1) // 2, (b2 - 1) // 2
    return SurdScalar(0, c * lam ** a / u ** (b + 1), 1, lam=lam)


def reference_alphas(n: int, lam, xi: Dict[Tuple[int, int], Fraction]) -> List[SurdScalar]:
    """alpha_1..alpha_n for n in {2, 3, 4}, written out term by term."""
    x = lambda i, j: xi.get((i, j), 0)
    hp = lambda a2, b2, c: half_power(lam, a2, b2, c)
    one = Fraction(1) if is_exact(lam) else 1.0
    a1 = hp(1, 1, -2) * x(0, 1)
    if n == 2:
        return [a1, hp(3, 3, 2) * x(0, 2)]
    if n == 3:
        a2 = (hp(3, 3, 2) * x(0, 2) - hp(3, 3, 3) * x(0, 3)
              + hp(3, 3, 2) * x(1, 2) - hp(1, 3, 1) * x(2, 1))
        return [a1, a2, hp(5, 5, -3) * x(0, 3)]
    if n == 4:
        # lam^(3/2)(lam-1)/(1-lam)^(5/2) in the xi_{0,3} term of alpha_2
        a2 = (hp(3, 3, 2) * x(0, 2) - hp(3, 5, 3 * (lam - one)) * x(0, 3)
              + hp(3, 3, 2) * x(1, 2) - hp(1, 3, 1) * x(2, 1))
        a3 = (hp(5, 5, -3) * x(0, 3) - hp(5, 7, 4 * (2 * lam * lam - lam - one)) * x(0, 4)
              - hp(5, 5, 6) * x(1, 3) + hp(3, 5, 2) * x(2, 2))
        return [a1, a2, a3, hp(7, 7, 5) * x(0, 4)]
    raise ValueError("reference coefficient formulas exist for n = 2, 3, 4 only")


def abelian_coefficients_n4(lam, pert: Perturbation) -> List[SurdScalar]:
    return reference_alphas(4, lam, pert.xi())


def generator_form(n: int, lam, xi: Dict[Tuple[int, int], Fraction],
                   table: ReductionTable = None) -> HPoly:
    """I(h) for n <= 4 as the short combination of I_{0,k} and I_{1,k}."""
    if table is None:
        table = table_for(lam, max(n, 3))
    x = lambda i, j: xi.get((i, j), 0)
    P = lambda k: table.reduce(0, k)
    Q = lambda k: table.reduce(1, k)
    if n == 1:
        return P(1).scale(x(0, 1))
    if n == 2:
        return P(1).scale(x(0, 1)) + P(2).scale(x(0, 2))
    inv = 1 / (2 * lam)
    if n == 3:
        return (P(1).scale(x(0, 1)) + P(2).scale(x(0, 2) - inv * x(2, 1))
                + P(3).scale(x(0, 3)) + Q(2).scale(x(1, 2)))
    if n == 4:
        return (P(1).scale(x(0, 1)) + P(2).scale(x(0, 2) - inv * x(2, 1) - inv * x(2, 2))
                + P(3).scale(x(0, 3)) + Q(2).scale(x(1, 2))
                + P(4).scale(x(0, 4)) + Q(3).scale(x(1, 3)))
    raise ValueError("generator form tabulated for n <= 4 only")


def alpha_jacobian(n: int, lam, columns=None) -> ExactMatrix:
    """d(alpha_1..alpha_n)/d(xi) from the engine, one column per xi index."""
    if columns is None:
        columns = [(0, k) for k in range(1, n + 1)]
    cols = []
    for (i, j) in columns:
        p = assemble_abelian(Perturbation(n, b={(i, j): 1}), lam)
        cols.append([p.coefficient(k) for k in range(1, n + 1)])
    return ExactMatrix([list(r) for r in zip(*cols)], lam)


def expected_jacobian_n3(lam) -> SurdScalar:
    """12 lam^(9/2) (1-lam)^(-9/2), the pi^3 already factored out."""
    return half_power(lam, 9, 9, 12).strip_pi()


def jacobian_determinant_n3(lam):
    return determinant(alpha_jacobian(3, lam))
