"""Exact arithmetic substrate: the field Q(s) with s = sqrt(lam*(1-lam)),
polynomials in the energy h over it, fraction-free linear solves and Sturm
root isolation.

Every closed form produced by the Abelian-integral engine is a rational
multiple of ``pi * s``, so scalars are stored as ``(rat + surd*s) * pi**k``
with ``k in {0, 1}``.  ``pi`` is a grade, never a number.

When ``lam`` is a float the same classes run in double precision (the
"float path"); exact equality is then meaningless and callers should compare
with a tolerance.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence, Union

Number = Union[int, Fraction, float]


class ExactMathError(ArithmeticError):
    pass


class GradeError(ExactMathError):
    """pi-grade overflow or an attempt to add quantities of different grade."""


class ContextMismatch(ExactMathError):
    pass


class SingularMatrix(ExactMathError):
    pass


class MixedGrade(ExactMathError):
    """Coefficients cannot be reduced to a common rational polynomial."""


def as_rational(value) -> Fraction:
    """Parse ``"p/q"``, ``"p"``, an int or a Fraction into a Fraction.

    Floats are rejected: exact mode must never silently absorb a rounded
    value.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def parse_lambda(value) -> Union[Fraction, float]:
    """Exact Fraction when possible; float for decimal or irrational input."""
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        text = value.strip()
        if re.fullmatch(r"[-+]?\d+(/\d+)?", text):
            return Fraction(text)
        return float(text)
    return as_rational(value)


def is_exact(lam) -> bool:
    return isinstance(lam, Fraction)


def _isqrt_exact(n: int):
    if n < 0:
        return None
    r = math.isqrt(n)
    return r if r * r == n else None


@lru_cache(maxsize=None, typed=True)
def _context(lam):
    """(d, r) with d = lam(1-lam) and r = sqrt(d) if d is a rational square."""
    d = lam * (1 - lam)
    if not is_exact(lam):
        return d, None
    num, den = _isqrt_exact(d.numerator), _isqrt_exact(d.denominator)
    if num is None or den is None:
        return d, None
    return d, Fraction(num, den)


def surd_is_rational(lam) -> bool:
    return is_exact(lam) and _context(lam)[1] is not None


class SurdScalar:
    """``(rat + surd*s) * pi**pi`` with ``s = +sqrt(lam*(1-lam))``.

    Zero is grade-neutral: it may be added to scalars of either grade.
    """

    __slots__ = ("rat", "surd", "pi", "lam")

    def __init__(self, rat: Number = 0, surd: Number = 0, pi: int = 0, *, lam):
        if pi not in (0, 1):
            raise GradeError(f"pi power {pi} outside {{0, 1}}")
        if is_exact(lam):
            rat, surd = Fraction(rat), Fraction(surd)
        else:
            rat, surd = float(rat), float(surd)
        self.rat = rat
        self.surd = surd
        self.pi = pi
        self.lam = lam

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, lam) -> "SurdScalar":
        return cls(0, 0, 0, lam=lam)

    @classmethod
    def one(cls, lam) -> "SurdScalar":
        return cls(1, 0, 0, lam=lam)

    @classmethod
    def s(cls, lam, pi: int = 0) -> "SurdScalar":
        return cls(0, 1, pi, lam=lam)

    # -- predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        if self.rat == 0 and self.surd == 0:
            return True
        r = _context(self.lam)[1]
        return r is not None and self.rat + self.surd * r == 0

    def __bool__(self):
        return not self.is_zero()

    def _rational_value(self):
        """Exact rational value of ``rat + surd*s`` when s is rational."""
        r = _context(self.lam)[1]
        return None if r is None else self.rat + self.surd * r

    def sign(self) -> int:
        """Exact sign of the real number (pi > 0 does not affect it)."""
        a, b = self.rat, self.surd
        if not is_exact(self.lam):
            v = a + b * math.sqrt(_context(self.lam)[0])
            return (v > 0) - (v < 0)
        v = self._rational_value()
        if v is not None:
            return (v > 0) - (v < 0)
        sa, sb = (a > 0) - (a < 0), (b > 0) - (b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb or sa
        # opposite signs: compare a^2 with b^2 d
        d = _context(self.lam)[0]
        diff = a * a - b * b * d
        return sa if diff > 0 else sb

    # -- coercion ---------------------------------------------------------
    def _lift(self, other) -> "SurdScalar":
        if isinstance(other, SurdScalar):
            if other.lam != self.lam:
                raise ContextMismatch(f"lam {other.lam} != {self.lam}")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return SurdScalar(other, 0, 0, lam=self.lam)
        if isinstance(other, float) and not is_exact(self.lam):
            return SurdScalar(other, 0, 0, lam=self.lam)
        return NotImplemented

    def _grade_for_sum(self, other: "SurdScalar") -> int:
        if self.pi == other.pi:
            return self.pi
        if self.is_zero():
            return other.pi
        if other.is_zero():
            return self.pi
        raise GradeError("cannot add scalars of pi grade 0 and 1")

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        pi = self._grade_for_sum(other)
        return SurdScalar(self.rat + other.rat, self.surd + other.surd, pi, lam=self.lam)

    __radd__ = __add__

    def __neg__(self):
        return SurdScalar(-self.rat, -self.surd, self.pi, lam=self.lam)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return SurdScalar.zero(self.lam)
        pi = self.pi + other.pi
        if pi > 1:
            raise GradeError("product of two pi-graded scalars")
        d = _context(self.lam)[0]
        a, b, c, e = self.rat, self.surd, other.rat, other.surd
        return SurdScalar(a * c + b * e * d, a * e + b * c, pi, lam=self.lam)

    __rmul__ = __mul__

    def inverse(self) -> "SurdScalar":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero SurdScalar")
        if self.pi:
            raise GradeError("inverse of a pi-graded scalar")
        v = self._rational_value()
        if v is not None:
            return SurdScalar(1 / v, 0, 0, lam=self.lam)
        d = _context(self.lam)[0]
        a, b = self.rat, self.surd
        norm = a * a - b * b * d
        return SurdScalar(a / norm, -b / norm, 0, lam=self.lam)

    def __truediv__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise ZeroDivisionError("SurdScalar division by zero")
        if self.is_zero():
            return SurdScalar.zero(self.lam)
        pi = self.pi - other.pi
        if pi < 0:
            raise GradeError("division would produce pi**-1")
        q = self.strip_pi() * other.strip_pi().inverse()
        return q.with_pi(pi)

    def __rtruediv__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other / self

    # -- grade helpers ----------------------------------------------------
    def strip_pi(self) -> "SurdScalar":
        return SurdScalar(self.rat, self.surd, 0, lam=self.lam)

    def with_pi(self, pi: int) -> "SurdScalar":
        return SurdScalar(self.rat, self.surd, pi, lam=self.lam)

    # -- comparison -------------------------------------------------------
    def __eq__(self, other):
        other = self._lift(other) if not isinstance(other, SurdScalar) else other
        if other is NotImplemented:
            return NotImplemented
        if other.lam != self.lam:
            return False
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        if self.pi != other.pi:
            return False
        return (self - other).is_zero()

    def __hash__(self):
        if self.is_zero():
            return hash(0)
        v = self._rational_value()
        if v is not None:
            return hash((v, self.pi))
        return hash((self.rat, self.surd, self.pi))

    def __float__(self):
        d = _context(self.lam)[0]
        v = float(self.rat) + float(self.surd) * math.sqrt(float(d))
        return v * math.pi if self.pi else v

    def to_str(self) -> str:
        return f"{self.rat} + {self.surd}*s [pi^{self.pi}]"

    def __repr__(self):
        return f"SurdScalar({self.to_str()!r}, lam={self.lam})"

    __str__ = to_str


_NUM = r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?(?:/\d+)?|[-+]?(?:inf|nan)"
_SURD_RE = re.compile(
    rf"^\s*({_NUM})\s*\+\s*({_NUM})\s*\*\s*s\s*(?:\[\s*pi\^([01])\s*\]|pi\^([01]))?\s*$"
)


def parse_surd(text: str, lam) -> SurdScalar:
    """Inverse of :meth:`SurdScalar.to_str`; the ``[pi^k]`` group is optional."""
    m = _SURD_RE.match(text)
    if not m:
        raise ValueError(f"not a surd scalar: {text!r}")
    conv = Fraction if is_exact(lam) else float
    pi = m.group(3) or m.group(4) or "0"
    return SurdScalar(conv(m.group(1)), conv(m.group(2)), int(pi), lam=lam)


def scalar_arith(x: SurdScalar, y: SurdScalar, op: str) -> SurdScalar:
    ops = {"add": x.__add__, "sub": x.__sub__, "mul": x.__mul__, "div": x.__truediv__}
    if op not in ops:
        raise ValueError(f"unknown op {op!r}")
    return ops[op](y)


# ---------------------------------------------------------------------------
# polynomials in h
# ---------------------------------------------------------------------------

class HPoly:
    """Polynomial in the energy h with SurdScalar coefficients (ascending)."""

    __slots__ = ("coeffs", "lam")

    def __init__(self, coeffs: Iterable, lam):
        cs = []
        for c in coeffs:
            if not isinstance(c, SurdScalar):
                c = SurdScalar(c, 0, 0, lam=lam)
            elif c.lam != lam:
                raise ContextMismatch(f"coefficient lam {c.lam} != {lam}")
            cs.append(c)
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = tuple(cs)
        self.lam = lam

    @classmethod
    def zero(cls, lam) -> "HPoly":
        return cls((), lam)

    @classmethod
    def monomial(cls, c, k: int, lam) -> "HPoly":
        zero = SurdScalar.zero(lam)
        return cls([zero] * k + [c], lam)

    @property
    def degree(self) -> int:
        """-1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, k: int) -> SurdScalar:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return SurdScalar.zero(self.lam)

    def leading(self) -> SurdScalar:
        return self.coefficient(self.degree)

    def _check(self, other: "HPoly"):
        if other.lam != self.lam:
            raise ContextMismatch(f"lam {other.lam} != {self.lam}")

    def __add__(self, other):
        if not isinstance(other, HPoly):
            return NotImplemented
        self._check(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return HPoly([self.coefficient(k) + other.coefficient(k) for k in range(n)], self.lam)

    def __neg__(self):
        return HPoly([-c for c in self.coeffs], self.lam)

    def __sub__(self, other):
        if not isinstance(other, HPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, HPoly):
            self._check(other)
            if self.is_zero() or other.is_zero():
                return HPoly.zero(self.lam)
            out = [SurdScalar.zero(self.lam)] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                if a.is_zero():
                    continue
                for j, b in enumerate(other.coeffs):
                    out[i + j] = out[i + j] + a * b
            return HPoly(out, self.lam)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c) -> "HPoly":
        return HPoly([a * c for a in self.coeffs], self.lam)

    def shift(self, k: int) -> "HPoly":
        """Multiply by h**k."""
        if self.is_zero():
            return self
        return HPoly([SurdScalar.zero(self.lam)] * k + list(self.coeffs), self.lam)

    def derivative(self) -> "HPoly":
        return HPoly([c * k for k, c in enumerate(self.coeffs)][1:], self.lam)

    def antiderivative(self) -> "HPoly":
        """Integral from 0 to h (zero constant term)."""
        if self.is_zero():
            return self
        return HPoly([SurdScalar.zero(self.lam)]
                     + [c * Fraction(1, k + 1) if is_exact(self.lam) else c * (1.0 / (k + 1))
                        for k, c in enumerate(self.coeffs)], self.lam)

    def __call__(self, h) -> SurdScalar:
        """Horner evaluation at an exact (or, on the float path, float) h."""
        acc = SurdScalar.zero(self.lam)
        for c in reversed(self.coeffs):
            acc = acc * h + c
        return acc

    def evaluate(self, h: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * h + float(c)
        return acc

    def __eq__(self, other):
        if not isinstance(other, HPoly):
            return NotImplemented
        return self.lam == other.lam and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.lam, self.coeffs))

    def __repr__(self):
        return f"HPoly({[c.to_str() for c in self.coeffs]}, lam={self.lam})"

    def to_json(self) -> list:
        return [c.to_str() for c in self.coeffs]

    @classmethod
    def from_json(cls, items: Sequence[str], lam) -> "HPoly":
        return cls([parse_surd(t, lam) for t in items], lam)

    def rationalize(self) -> list:
        """Rational coefficient list with the common pi/s unit divided out.

        Roots are unaffected.  Raises MixedGrade if no common unit exists.
        """
        cs = [c for c in self.coeffs if not c.is_zero()]
        if not cs:
            return []
        if len({c.pi for c in cs}) > 1:
            raise MixedGrade("coefficients of different pi grade")
        if not is_exact(self.lam):
            d = _context(self.lam)[0]
            return [Fraction(float(c.rat) + float(c.surd) * math.sqrt(d)) for c in self.coeffs]
        if all(c.rat == 0 for c in cs):
            return [c.surd for c in self.coeffs]
        if all(c.surd == 0 for c in cs):
            return [c.rat for c in self.coeffs]
        r = _context(self.lam)[1]
        if r is not None:
            return [c.rat + c.surd * r for c in self.coeffs]
        raise MixedGrade("coefficients mix rational and surd parts")


def poly_arith(p: HPoly, q, op: str) -> HPoly:
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    if op == "scale":
        return p.scale(q)
    if op == "shift_by_h_power":
        return p.shift(int(q))
    raise ValueError(f"unknown op {op!r}")


def poly_antiderivative(p: HPoly) -> HPoly:
    return p.antiderivative()


def poly_derivative(p: HPoly) -> HPoly:
    return p.derivative()


# ---------------------------------------------------------------------------
# linear algebra
# ---------------------------------------------------------------------------

class ExactMatrix:
    """Dense rows x cols matrix of SurdScalar."""

    def __init__(self, rows: Sequence[Sequence], lam):
        rows = [list(r) for r in rows]
        if not rows or not rows[0]:
            raise ValueError("matrix dimensions must be positive")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("ragged matrix")
        self.lam = lam
        self.rows = [[c if isinstance(c, SurdScalar) else SurdScalar(c, lam=lam) for c in r]
                     for r in rows]

    @property
    def shape(self):
        return len(self.rows), len(self.rows[0])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def apply(self, vec: Sequence[SurdScalar]) -> list:
        out = []
        for row in self.rows:
            acc = SurdScalar.zero(self.lam)
            for a, v in zip(row, vec):
                acc = acc + a * v
            out.append(acc)
        return out

    def grade(self) -> int:
        """Common pi grade of the nonzero entries (0 for the zero matrix)."""
        grades = {c.pi for r in self.rows for c in r if not c.is_zero()}
        if len(grades) > 1:
            raise GradeError("matrix mixes pi grades")
        return grades.pop() if grades else 0

    def strip_pi(self) -> "ExactMatrix":
        return ExactMatrix([[c.strip_pi() for c in r] for r in self.rows], self.lam)


def _bareiss(rows: list, n: int, ncols: int):
    """In-place fraction-free elimination on an n x ncols array; returns swap parity."""
    swaps = 0
    prev = SurdScalar.one(rows[0][0].lam)
    for k in range(n - 1):
        if rows[k][k].is_zero():
            for r in range(k + 1, n):
                if not rows[r][k].is_zero():
                    rows[k], rows[r] = rows[r], rows[k]
                    swaps += 1
                    break
            else:
                raise SingularMatrix(f"no pivot in column {k}")
        pivot = rows[k][k]
        for i in range(k + 1, n):
            lead = rows[i][k]
            for j in range(k + 1, ncols):
                rows[i][j] = (rows[i][j] * pivot - lead * rows[k][j]) / prev
            rows[i][k] = SurdScalar.zero(pivot.lam)
        prev = pivot
    if rows[n - 1][n - 1].is_zero():
        raise SingularMatrix("matrix is singular")
    return swaps


def determinant(m: ExactMatrix):
    """Return ``(value, pi_power)`` with det(m) = value * pi**pi_power."""
    n, c = m.shape
    if n != c:
        raise ValueError("determinant of a non-square matrix")
    g = m.grade()
    rows = [list(r) for r in m.strip_pi().rows]
    try:
        swaps = _bareiss(rows, n, n)
    except SingularMatrix:
        return SurdScalar.zero(m.lam), 0
    det = rows[n - 1][n - 1]
    return (-det if swaps % 2 else det), g * n


def solve_exact(m: ExactMatrix, rhs: Sequence[SurdScalar]) -> list:
    """Solve ``m x = rhs`` exactly by Bareiss elimination.

    A matrix whose entries all carry pi is handled by dividing pi out of both
    sides, so the solution has grade ``grade(rhs) - 1``.
    """
    n, c = m.shape
    if n != c:
        raise ValueError("solve_exact needs a square matrix")
    if len(rhs) != n:
        raise ValueError("rhs length mismatch")
    lam = m.lam
    rhs = [v if isinstance(v, SurdScalar) else SurdScalar(v, lam=lam) for v in rhs]
    g = m.grade()
    if g:
        rhs = [v / SurdScalar(1, 0, 1, lam=lam) for v in rhs]
    rows = [list(r) + [v] for r, v in zip(m.strip_pi().rows, rhs)]
    _bareiss(rows, n, n + 1)
    x = [SurdScalar.zero(lam)] * n
    for i in range(n - 1, -1, -1):
        acc = rows[i][n]
        for j in range(i + 1, n):
            acc = acc - rows[i][j] * x[j]
        x[i] = acc / rows[i][i]
    return x


# ---------------------------------------------------------------------------
# rational polynomials and Sturm sequences
# ---------------------------------------------------------------------------

def _trim(p: list) -> list:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def rpoly_eval(p: Sequence[Fraction], x) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def rpoly_deriv(p: Sequence[Fraction]) -> list:
    return _trim([c * k for k, c in enumerate(p)][1:])


def rpoly_divmod(a: Sequence[Fraction], b: Sequence[Fraction]):
    a, b = _trim(a), _trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    r = list(a)
    lead = b[-1]
    while len(r) >= len(b) and r:
        k = len(r) - len(b)
        f = r[-1] / lead
        q[k] = f
        for i, c in enumerate(b):
            r[i + k] -= f * c
        r = _trim(r)
    return _trim(q), r


def rpoly_gcd(a: Sequence[Fraction], b: Sequence[Fraction]) -> list:
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, rpoly_divmod(a, b)[1]
    if not a:
        return []
    lead = a[-1]
    return [c / lead for c in a]


def rpoly_sub(a: Sequence[Fraction], b: Sequence[Fraction]) -> list:
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)])


def squarefree_decomposition(p: Sequence[Fraction]) -> list:
    """Yun's algorithm: [(factor, multiplicity), ...] with p ~ prod factor**mult."""
    p = _trim(p)
    if len(p) <= 1:
        return []
    dp = rpoly_deriv(p)
    a = rpoly_gcd(p, dp)
    b = rpoly_divmod(p, a)[0]
    d = rpoly_sub(rpoly_divmod(dp, a)[0], rpoly_deriv(b))
    out = []
    k = 1
    while len(b) > 1:
        a = rpoly_gcd(b, d) if d else [c / b[-1] for c in b]
        if len(a) > 1:
            out.append((a, k))
        b = rpoly_divmod(b, a)[0]
        d = rpoly_sub(rpoly_divmod(d, a)[0], rpoly_deriv(b)) if d else []
        k += 1
    return out


def sturm_sequence(p: Sequence[Fraction]) -> list:
    seq = [_trim(p), rpoly_deriv(p)]
    while seq[-1]:
        r = rpoly_divmod(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append([-c for c in r])
    return [s for s in seq if s]


def _sign_at(p: Sequence[Fraction], x) -> int:
    if x == math.inf:
        v = p[-1]
    elif x == -math.inf:
        v = p[-1] * (-1) ** (len(p) - 1)
    else:
        v = rpoly_eval(p, x)
    return (v > 0) - (v < 0)


def sign_variations(seq: Sequence[Sequence[Fraction]], x) -> int:
    signs = [s for s in (_sign_at(p, x) for p in seq) if s]
    return sum(1 for u, v in zip(signs, signs[1:]) if u != v)


def count_real_roots(p: Sequence[Fraction], lo, hi) -> int:
    """Distinct real roots in (lo, hi] by Sturm's theorem."""
    seq = sturm_sequence(p)
    return sign_variations(seq, lo) - sign_variations(seq, hi)


def _primitive_lead(p: Sequence[Fraction]) -> int:
    den = 1
    for c in p:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in p]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    return abs(ints[-1] // g)


@dataclass
class RootReport:
    """Positive real roots: isolating intervals, multiplicities, exact values.

    ``exact[k]`` is the certified rational root or None.
    """

    count: int
    intervals: list = field(default_factory=list)
    multiplicities: list = field(default_factory=list)
    exact: list = field(default_factory=list)

    def __iter__(self):
        yield self.count
        yield self.intervals

    @property
    def approximations(self) -> list:
        return [float((lo + hi) / 2) for lo, hi in self.intervals]

    def to_json(self) -> dict:
        return {
            "count": self.count,
            "roots": [
                {"lo": str(lo), "hi": str(hi), "multiplicity": m,
                 "exact": None if e is None else str(e)}
                for (lo, hi), m, e in zip(self.intervals, self.multiplicities, self.exact)
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RootReport":
        roots = obj["roots"]
        return cls(
            count=obj["count"],
            intervals=[(Fraction(r["lo"]), Fraction(r["hi"])) for r in roots],
            multiplicities=[r["multiplicity"] for r in roots],
            exact=[None if r["exact"] is None else Fraction(r["exact"]) for r in roots],
        )


def _cauchy_bound(p: Sequence[Fraction]) -> Fraction:
    lead = abs(p[-1])
    return 1 + max(abs(c) / lead for c in p[:-1]) if len(p) > 1 else Fraction(1)


def _isolate(g: list, lo: Fraction, hi: Fraction) -> list:
    """Isolating intervals (a, b) of the squarefree g inside (lo, hi]."""
    seq = sturm_sequence(g)
    out = []
    stack = [(lo, hi, sign_variations(seq, lo) - sign_variations(seq, hi))]
    while stack:
        a, b, n = stack.pop()
        if n == 0:
            continue
        if n == 1:
            out.append((a, b))
            continue
        mid = (a + b) / 2
        k = 1
        while rpoly_eval(g, mid) == 0:
            mid = (a + b) / 2 + (b - a) / (2 ** (k + 3))
            k += 1
        left = sign_variations(seq, a) - sign_variations(seq, mid)
        stack.append((mid, b, n - left))
        stack.append((a, mid, left))
    return out


def _refine(g: list, a: Fraction, b: Fraction, width: Fraction):
    """Bisect (a, b) around its single simple root; returns (a, b, exact)."""
    sa = _sign_at(g, a)
    while b - a >= width:
        m = (a + b) / 2
        sm = _sign_at(g, m)
        if sm == 0:
            return m, m, m
        if sm == sa:
            a = m
        else:
            b = m
    return a, b, None


CERTIFY_MAX_LEAD = 10 ** 12


def count_positive_roots(p, width: float = 1e-6, certify: bool = True) -> RootReport:
    """Count and isolate the distinct roots of p in (0, +inf).

    ``p`` is an HPoly (its common pi*s unit is divided out) or a list of
    rational coefficients.  Intervals are refined below ``width``; when
    ``certify`` is set, rational roots are confirmed by exact evaluation and
    reported in ``exact``.
    """
    coeffs = p.rationalize() if isinstance(p, HPoly) else [Fraction(c) for c in p]
    coeffs = _trim(coeffs)
    if not coeffs:
        raise ValueError("count_positive_roots of the zero polynomial")
    while coeffs[0] == 0:
        coeffs = coeffs[1:]
    w = Fraction(width) if not isinstance(width, Fraction) else width
    found = []
    for factor, mult in squarefree_decomposition(coeffs):
        bound = _cauchy_bound(factor)
        lead_int = _primitive_lead(factor)
        for a, b in _isolate(factor, Fraction(0), bound):
            target = w
            if certify and lead_int <= CERTIFY_MAX_LEAD:
                target = min(w, Fraction(1, 2 * lead_int * lead_int))
            a, b, ex = _refine(factor, a, b, target)
            if ex is None and certify and lead_int <= CERTIFY_MAX_LEAD:
                cand = ((a + b) / 2).limit_denominator(lead_int)
                if a < cand < b and rpoly_eval(factor, cand) == 0:
                    ex = cand
            if ex is None and b - a >= w:
                a, b, ex = _refine(factor, a, b, w)
            found.append((a, b, mult, ex))
    found.sort(key=lambda t: t[0])
    return RootReport(
        count=len(found),
        intervals=[(a, b) for a, b, _, _ in found],
        multiplicities=[m for _, _, m, _ in found],
        exact=[e for *_, e in found],
    )


def count_positive_roots_float(p: HPoly, samples: int = 20000, hmax: float | None = None) -> RootReport:
    """Sign-change fallback for coefficients that admit no rational form."""
    import numpy as np

    vals = [float(c) for c in p.coeffs]
    while vals and vals[0] == 0:
        vals = vals[1:]
    if hmax is None:
        lead = abs(vals[-1])
        hmax = 1 + max(abs(v) / lead for v in vals[:-1]) if len(vals) > 1 else 1.0
    grid = np.linspace(0, hmax, samples + 1)[1:]
    y = np.polynomial.polynomial.polyval(grid, vals)
    idx = np.nonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0)[0]
    intervals = [(Fraction(float(grid[k])), Fraction(float(grid[k + 1]))) for k in idx]
    return RootReport(len(intervals), intervals, [1] * len(intervals), [None] * len(intervals))
