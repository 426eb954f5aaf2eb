"""Floating-point line integrals over the ovals H = h, independent of the
symbolic engine.

With X = sqrt(2h/(1-lam)) and x = X sin(theta) the square root in the two
arcs y = -lam x^2 - lam x +- sqrt(2 lam h) cos(theta) becomes analytic, so
plain adaptive Gauss-Legendre in theta converges fast.  Orientation follows
the flow (counterclockwise), which makes oint y dx negative.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Sequence, Tuple

import numpy as np

from .perturbation import Perturbation

DEFAULT_TOL = 1e-10
MAX_DEPTH = 30
SMALL_H = 1e-8
_ORDER = 16


class NonConvergence(ArithmeticError):
    pass


def hamiltonian(lam, x, y):
    return 0.5 * x * x + lam * x ** 3 + 0.5 * lam * x ** 4 + 0.5 * y * y / lam + x * y + x * x * y


@dataclass(frozen=True)
class OvalParametrization:
    lam: float
    h: float

    def __post_init__(self):
        if not 0 < self.lam < 1:
            raise ValueError("lambda must lie in (0, 1)")
        if self.h <= 0:
            raise ValueError("h must be positive")

    @property
    def X(self) -> float:
        return math.sqrt(2 * self.h / (1 - self.lam))

    @property
    def A(self) -> float:
        """Half the vertical chord at x = 0: sqrt(2 lam h)."""
        return math.sqrt(2 * self.lam * self.h)

    def radicand(self, x):
        return (self.lam ** 2 - self.lam) * x * x + 2 * self.lam * self.h

    def arcs(self, theta):
        """x, y_upper, y_lower at the parameter theta in [-pi/2, pi/2]."""
        x = self.X * np.sin(theta)
        mid = -self.lam * x * x - self.lam * x
        r = self.A * np.cos(theta)
        return x, mid + r, mid - r

    def slopes(self, theta):
        """dx/dtheta, dy_upper/dtheta, dy_lower/dtheta."""
        x = self.X * np.sin(theta)
        dx = self.X * np.cos(theta)
        base = (-2 * self.lam * x - self.lam) * dx
        dr = -self.A * np.sin(theta)
        return dx, base + dr, base - dr

    def turning_points(self):
        """The two points x = +-X where the upper and lower arcs meet."""
        X, lam = self.X, self.lam
        return (X, -lam * X - lam * X * X), (-X, lam * X - lam * X * X)


@lru_cache(maxsize=8)
def _nodes(order: int):
    return np.polynomial.legendre.leggauss(order)


def adaptive_gl(f: Callable, a: float, b: float, tol: float = DEFAULT_TOL,
                max_depth: int = MAX_DEPTH, order: int = _ORDER) -> Tuple[float, float]:
    """Adaptive Gauss-Legendre with panel bisection.

    A panel is accepted when one rule over it and the same rule over its two
    halves agree to within tol times the running L1 estimate of |f|, scaled by
    the panel's share of [a, b].  Returns (value, error estimate).
    """
    t, w = _nodes(order)

    def rule(lo, hi):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        vals = f(mid + half * t)
        return half * float(np.dot(w, vals)), half * float(np.dot(w, np.abs(vals)))

    whole, l1 = rule(a, b)
    stack = [(a, b, whole, 0)]
    total, err = 0.0, 0.0
    length = b - a
    while stack:
        lo, hi, est, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left, l1l = rule(lo, mid)
        right, l1r = rule(mid, hi)
        refined = left + right
        diff = abs(refined - est)
        budget = tol * max(l1, 1e-300) * (hi - lo) / length
        # the second test accepts panels already at round-off level
        if diff <= budget or diff <= 64 * np.finfo(float).eps * l1:
            total += refined
            err += diff
        elif depth >= max_depth:
            raise NonConvergence(f"no convergence on [{lo}, {hi}] at depth {depth}")
        else:
            stack.append((lo, mid, left, depth + 1))
            stack.append((mid, hi, right, depth + 1))
    return total, err


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    below_resolution: bool = False


def loop_integral(lam: float, h: float, form: Callable, tol: float = DEFAULT_TOL) -> QuadResult:
    """oint of the one-form ``form(x, y, dx, dy)`` (vectorized) around the oval."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if h < SMALL_H:
        return QuadResult(0.0, 0.0, True)
    ov = OvalParametrization(float(lam), float(h))

    def integrand(theta):
        x, yu, yl = ov.arcs(theta)
        dx, dyu, dyl = ov.slopes(theta)
        # lower arc runs left to right, upper arc right to left
        return form(x, yl, dx, dyl) - form(x, yu, dx, dyu)

    v, e = adaptive_gl(integrand, -math.pi / 2, math.pi / 2, tol)
    return QuadResult(v, e)


def quad_Iij_detailed(lam, h, idx, tol: float = DEFAULT_TOL) -> QuadResult:
    i, j = idx
    return loop_integral(lam, h, lambda x, y, dx, dy: x ** i * y ** j * dx, tol)


def quad_Iij(lam, h, idx, tol: float = DEFAULT_TOL) -> float:
    return quad_Iij_detailed(lam, h, idx, tol).value


def quad_ydy(lam, h, idx, tol: float = DEFAULT_TOL) -> float:
    """oint x^i y^j dy."""
    i, j = idx
    return loop_integral(lam, h, lambda x, y, dx, dy: x ** i * y ** j * dy, tol).value


def _poly2(terms, x, y):
    acc = 0.0 * x
    for i, j, c in terms:
        acc = acc + c * x ** i * y ** j
    return acc


def quad_abelian_detailed(lam, h, pert: Perturbation, tol: float = DEFAULT_TOL) -> QuadResult:
    fa, gb = pert.float_terms()
    return loop_integral(lam, h, lambda x, y, dx, dy: _poly2(gb, x, y) * dx - _poly2(fa, x, y) * dy,
                         tol)


def quad_abelian(lam, h, pert: Perturbation, tol: float = DEFAULT_TOL) -> float:
    """oint g dx - f dy over the oval H = h."""
    return quad_abelian_detailed(lam, h, pert, tol).value


def quad_energy_derivative(lam, h, idx, tol: float = DEFAULT_TOL) -> float:
    """j oint x^i y^(j-1) / (x + x^2 + y/lam) dx, the h-derivative of I_{i,j}.

    On each arc x + x^2 + y/lam = +-sqrt(2 lam h) cos(theta)/lam, which cancels
    the cos(theta) of dx exactly.
    """
    i, j = idx
    if j == 0:
        return 0.0
    lam, h = float(lam), float(h)
    ov = OvalParametrization(lam, h)
    scale = j * lam * ov.X / ov.A

    def integrand(theta):
        x, yu, yl = ov.arcs(theta)
        return -scale * x ** i * (yl ** (j - 1) + yu ** (j - 1))

    return adaptive_gl(integrand, -math.pi / 2, math.pi / 2, tol)[0]


def oval_points(lam, h, count: int) -> List[Tuple[float, float]]:
    """count points tracing the oval once, counterclockwise; first == last."""
    if count < 4:
        raise ValueError("need at least 4 points")
    ov = OvalParametrization(float(lam), float(h))
    lower = count // 2
    upper = count - lower
    th_lo = np.linspace(-math.pi / 2, math.pi / 2, lower, endpoint=False)
    th_up = np.linspace(math.pi / 2, -math.pi / 2, upper - 1, endpoint=False)
    pts = []
    for th in th_lo:
        x, _, yl = ov.arcs(th)
        pts.append((float(x), float(yl)))
    for th in th_up:
        x, yu, _ = ov.arcs(th)
        pts.append((float(x), float(yu)))
    pts.append(pts[0])
    return pts


CSV_HEADER = ("lambda", "h", "i", "j", "value", "est_error")


def quad_table_csv(lams: Sequence[float], hs: Sequence[float], indices, tol=DEFAULT_TOL) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for lam in lams:
        for h in hs:
            for (i, j) in indices:
                r = quad_Iij_detailed(lam, h, (i, j), tol)
                w.writerow([repr(float(lam)), repr(float(h)), i, j, repr(r.value), repr(r.error)])
    return buf.getvalue()
