"""Exact reduction of the integrals I_{i,j}(h) = oint x^i y^j dx over the ovals
H = h of the isochronous cubic normal form

    H = x^2/2 + lam x^3 + lam x^4/2 + y^2/(2 lam) + x y + x^2 y,

to explicit polynomials in h.

Every I_{i,j} is first written as a linear form over the generators
P_k = I_{0,k} and Q_k = I_{1,k} with coefficients that are polynomials in h
(the i = 2 relation and the general recurrence for i >= 3).  The generators
themselves come from three closed forms at level 3 and, above that, from a
first-order differential identity in h which isolates P'_{L+1} and Q'_{L+1}.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .exactmath import (
    ExactMatrix,
    HPoly,
    RootReport,
    SingularMatrix,
    SurdScalar,
    _context,
    count_positive_roots,
    is_exact,
    parse_lambda,
    parse_surd,
    solve_exact,
)
from .perturbation import Perturbation

log = logging.getLogger(__name__)

DEFAULT_LEVEL = 12

GenKey = Tuple[str, int]            # ("P", k) or ("Q", k)
FormKey = Tuple[str, int, int]      # generator plus derivative order 0/1
Form = Dict[FormKey, HPoly]


class EngineError(ArithmeticError):
    pass


class MissingDependency(EngineError):
    pass


class DegreeViolation(EngineError):
    pass


class LevelExceeded(EngineError):
    pass


class GradingViolation(EngineError):
    """A computed integral has a nonzero rational part in the s-basis."""


class SingularPivot(EngineError):
    pass


class LambdaOutOfRange(ValueError):
    pass


def check_lambda(lam):
    if not 0 < lam < 1:
        raise LambdaOutOfRange(f"lambda must lie in (0, 1), got {lam}")
    return lam


def _num(lam, value):
    """Exact Fraction in exact mode, float otherwise."""
    return Fraction(value) if is_exact(lam) else float(value)


def _pis(lam, c) -> SurdScalar:
    """The scalar c * pi * s."""
    return SurdScalar(0, c, 1, lam=lam)


def _negligible(x: SurdScalar, scale: float = 1.0) -> bool:
    if is_exact(x.lam):
        return x.is_zero()
    return abs(float(x)) <= 1e-9 * max(scale, 1.0)


def _poly_negligible(p: HPoly) -> bool:
    if is_exact(p.lam):
        return p.is_zero()
    return all(_negligible(c) for c in p.coeffs)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def base_generators(lam) -> Dict[GenKey, HPoly]:
    """P_1, P_2, Q_2, P_3, Q_3 from their closed forms (pi*s basis)."""
    check_lambda(lam)
    one = _num(lam, 1)
    u = one - lam
    mono = lambda c, k: HPoly.monomial(_pis(lam, c), k, lam)
    p2 = mono(2 * lam / u ** 2, 2)
    c3 = -3 * lam / u ** 3
    return {
        ("P", 1): mono(-2 / u, 1),
        ("P", 2): p2,
        ("Q", 2): p2,
        ("P", 3): HPoly([0, 0, _pis(lam, c3 * u), _pis(lam, c3 * lam)], lam),
        ("Q", 3): mono(-6 * lam ** 2 / u ** 3, 3),
    }


def moment_integral(n_even: int, lam) -> HPoly:
    """I_{n,1}(h) for even n as a single monomial c_m h^{m+1}, n = 2m.

    The arc integral reduces to a Wallis product:
    c_m = c_{m-1} * (2m-1)/(2m+2) * 2/(1-lam), c_0 = -2 pi s/(1-lam).
    """
    if n_even < 0 or n_even % 2:
        raise ValueError("moment_integral needs an even, nonnegative index")
    check_lambda(lam)
    u = _num(lam, 1) - lam
    m = n_even // 2
    c = -2 / u
    for k in range(1, m + 1):
        c = c * Fraction(2 * k - 1, 2 * k + 2) * 2 / u if is_exact(lam) \
            else c * (2 * k - 1) / (2 * k + 2) * 2 / u
    return HPoly.monomial(_pis(lam, c), m + 1, lam)


# ---------------------------------------------------------------------------
# linear forms over the generators
# ---------------------------------------------------------------------------

def _combine(lam, terms: Iterable) -> Form:
    """Sum of coef * form; coef is a number, SurdScalar or HPoly."""
    out: Form = {}
    for c, f in terms:
        for k, p in f.items():
            q = p * c if isinstance(c, HPoly) else p.scale(c)
            out[k] = out[k] + q if k in out else q
    return {k: v for k, v in out.items() if not v.is_zero()}


def _d(form: Form) -> Form:
    """d/dh of a form whose keys are all of derivative order 0."""
    out: Form = {}
    for (kind, k, order), c in form.items():
        if order:
            raise ValueError("second derivatives are never needed")
        dc = c.derivative()
        if not dc.is_zero():
            key = (kind, k, 0)
            out[key] = out[key] + dc if key in out else dc
        out[(kind, k, 1)] = c
    return out


class FormBuilder:
    """Memoized expansion of I_{i,j} in the generators, for one lambda."""

    def __init__(self, lam):
        self.lam = check_lambda(lam)
        self._memo: Dict[Tuple[int, int], Form] = {}
        self._h = HPoly([0, 1], lam)

    def const(self, c) -> HPoly:
        return HPoly([c], self.lam)

    def lin(self, c0, c1) -> HPoly:
        return HPoly([c0, c1], self.lam)

    def gen(self, kind: str, k: int) -> Form:
        return {(kind, k, 0): self.const(1)}

    def form(self, i: int, j: int) -> Form:
        if i < 0:
            return {}
        key = (i, j)
        if key not in self._memo:
            self._memo[key] = self._build(i, j)
        return self._memo[key]

    def _build(self, i: int, j: int) -> Form:
        lam = self.lam
        if j == 0 or (i, j) == (1, 1):
            return {}
        if i == 0:
            return self.gen("P", j)
        if i == 1:
            return self.gen("Q", j)
        if i == 2:
            if j == 1:
                return _combine(lam, [(-1 / (2 * lam), self.gen("P", 2))])
            return self._second_column(j - 1)
        return self._general(i, j)

    def _second_column(self, n: int) -> Form:
        """I_{2,n+1} from I_{2,n} and generators (n >= 1)."""
        lam = self.lam
        N = _num(lam, n)
        den = (N + 3) * (2 * N + 5)
        terms = [
            ((N + 1) * (9 * lam * N - 8 * N + 24 * lam - 21) / (4 * N * N + 22 * N + 30),
             self.form(2, n)),
            (self.lin(0, 2 * (N + 1) / den), self.form(0, n)),
            (N * (3 * lam * N - 2 * N + 8 * lam - 5) / (2 * lam * den), self.form(0, n + 1)),
            (-(N + 1) / (lam * (N + 2)), self.form(0, n + 2)),
            (self.lin(-(N + 1) * (-3 * lam * N + 2 * N - 8 * lam + 5) / (2 * lam * den),
                      -(N + 1) * (16 * lam * N + 40 * lam) / (2 * lam * den)),
             self.form(1, n)),
            ((lam * N - 2 * N - 3) / (lam * (N + 3)), self.form(1, n + 1)),
        ]
        return _combine(lam, terms)

    def _general(self, i: int, j: int) -> Form:
        """The recurrence lowering i by up to four (valid for i >= 3)."""
        lam = self.lam
        I, J = _num(lam, i), _num(lam, j)
        pre = 1 / (lam * (I + 2 * J + 1))
        terms = [
            (self.lin(0, pre * 2 * (I - 3)), self.form(i - 4, j)),
            (-pre * (I + J - 1), self.form(i - 2, j)),
            (-pre * lam * (2 * I + 3 * J), self.form(i - 1, j)),
            (-pre * J * (I + 2 * J + 1) / (J + 1), self.form(i - 2, j + 1)),
            (-pre * J * (I + J - 1) / (J + 1), self.form(i - 3, j + 1)),
        ]
        return _combine(lam, terms)

    def identity(self, i: int, L: int) -> Form:
        """Residual of (i+2L+1) I_{i,L} = 4h I'_{i,L} - I'_{i+2,L} - lam I'_{i+3,L}
        - L/(L+1) I'_{i+1,L+1}; it vanishes identically."""
        lam = self.lam
        Lf = _num(lam, L)
        rhs = [
            (self.lin(0, 4), _d(self.form(i, L))),
            (-1, _d(self.form(i + 2, L))),
            (-lam, _d(self.form(i + 3, L))),
            (-Lf / (Lf + 1), _d(self.form(i + 1, L + 1))),
        ]
        lhs = (-(i + 2 * Lf + 1), self.form(i, L))
        return _combine(lam, rhs + [lhs])


_BUILDERS: Dict[object, FormBuilder] = {}


def form_builder(lam) -> FormBuilder:
    key = (type(lam), lam)
    b = _BUILDERS.get(key)
    if b is None:
        b = _BUILDERS[key] = FormBuilder(lam)
    return b


def expand_in_generators(lam, i: int, j: int) -> Dict[GenKey, HPoly]:
    """I_{i,j} as {generator: polynomial coefficient}."""
    return {(kind, k): c for (kind, k, _), c in form_builder(lam).form(i, j).items()}


def evaluate_form(form: Form, gens: Dict[GenKey, HPoly], lam) -> HPoly:
    acc = HPoly.zero(lam)
    for (kind, k, order), c in form.items():
        g = gens.get((kind, k))
        if g is None:
            raise LevelExceeded(f"generator I_{{{0 if kind == 'P' else 1},{k}}} not in table")
        acc = acc + c * (g.derivative() if order else g)
    return acc


def _check_grading(p: HPoly, what: str):
    for c in p.coeffs:
        if c.is_zero():
            continue
        if c.pi != 1 or not _negligible(SurdScalar(c.rat, 0, 0, lam=c.lam)):
            raise GradingViolation(f"{what} has a coefficient outside pi*s*Q: {c}")


# ---------------------------------------------------------------------------
# the table
# ---------------------------------------------------------------------------

class ReductionTable:
    """Generators P_k, Q_k for k <= level plus a memo of reduced entries.

    Treat as immutable: extend_level returns a new table.
    """

    def __init__(self, lam, level: int, generators: Dict[GenKey, HPoly]):
        self.lam = check_lambda(lam)
        self.level = level
        self._gens = dict(generators)
        self._entries: Dict[Tuple[int, int], HPoly] = {}
        for (kind, k), g in self._gens.items():
            _check_grading(g, f"I_{{{0 if kind == 'P' else 1},{k}}}")

    @property
    def generators(self) -> Dict[GenKey, HPoly]:
        return dict(self._gens)

    def generator(self, kind: str, k: int) -> HPoly:
        if kind == "Q" and k == 1:
            return HPoly.zero(self.lam)
        try:
            return self._gens[(kind, k)]
        except KeyError:
            raise LevelExceeded(f"{kind}_{k} beyond level {self.level}") from None

    def is_complete(self) -> bool:
        need = [("P", k) for k in range(1, self.level + 1)]
        need += [("Q", k) for k in range(2, self.level + 1)]
        return all(key in self._gens for key in need)

    def reduce(self, i: int, j: int) -> HPoly:
        if i < 0 or j < 0:
            raise ValueError("indices must be nonnegative")
        if j == 0:
            return HPoly.zero(self.lam)
        if i + j > self.level and not (i <= 1 and j <= self.level):
            raise LevelExceeded(f"I_{{{i},{j}}} needs level {i + j} > {self.level}")
        key = (i, j)
        if key not in self._entries:
            p = evaluate_form(form_builder(self.lam).form(i, j), self._gens, self.lam)
            _check_grading(p, f"I_{{{i},{j}}}")
            self._entries[key] = p
        return self._entries[key]

    def entries(self) -> Dict[Tuple[int, int], HPoly]:
        """All entries with i + j <= level, j >= 1."""
        out = {}
        for total in range(1, self.level + 1):
            for i in range(total):
                out[(i, total - i)] = self.reduce(i, total - i)
        return out

    def to_json(self) -> dict:
        return {
            "lambda": str(self.lam),
            "level": self.level,
            "generators": {f"{kind}{k}": g.to_json() for (kind, k), g in sorted(self._gens.items())},
        }


def base_integrals(lam) -> ReductionTable:
    return ReductionTable(lam, 3, base_generators(lam))


def seed_table(lam) -> ReductionTable:
    """Level-1 table holding only I_{0,1}; extend_level rebuilds the rest."""
    return ReductionTable(lam, 1, {("P", 1): base_generators(lam)[("P", 1)]})


def _solve_for(residual: Form, target: GenKey, gens: Dict[GenKey, HPoly], lam) -> HPoly:
    """Isolate the derivative of ``target`` in an identity and integrate."""
    kind, k = target
    known = {key: c for key, c in residual.items() if key[:2] != target}
    for key, c in known.items():
        if key[:2] not in gens and not (key[0] == "Q" and key[1] == 1):
            if _poly_negligible(c):
                continue
            raise MissingDependency(f"{key[0]}_{key[1]} needed while solving for {kind}_{k}")
    c0 = residual.get((kind, k, 0), HPoly.zero(lam))
    c1 = residual.get((kind, k, 1), HPoly.zero(lam))
    if not _poly_negligible(c0) or c1.degree != 0 or _negligible(c1.coefficient(0)):
        raise DegreeViolation(f"identity does not determine {kind}_{k}' algebraically")
    rest = evaluate_form({key: c for key, c in known.items() if not _poly_negligible(c)},
                         gens, lam)
    return (-rest).scale(c1.coefficient(0).inverse()).antiderivative()


def extend_level(table: ReductionTable) -> ReductionTable:
    """Level L -> L+1: new generators P_{L+1} then Q_{L+1}."""
    if not table.is_complete():
        raise MissingDependency(f"table at level {table.level} is incomplete")
    lam, L = table.lam, table.level
    fb = form_builder(lam)
    gens = table.generators
    new = {}
    for kind, i in (("P", 0), ("Q", 1)):
        target = (kind, L + 1)
        if kind == "Q" and L + 1 == 1:
            continue
        p = _solve_for(fb.identity(i, L), target, gens, lam)
        if p.degree != L + 1 or not p.coefficient(0).is_zero():
            raise DegreeViolation(f"{kind}_{L + 1} has degree {p.degree}, expected {L + 1}")
        gens[target] = new[target] = p
    return ReductionTable(lam, L + 1, gens)


_TABLES: Dict[object, ReductionTable] = {}


def table_for(lam, level: int = DEFAULT_LEVEL) -> ReductionTable:
    """Cached table of at least the requested level."""
    level = max(level, 3)
    key = (type(lam), lam)   # 0.5 == Fraction(1, 2) must not share a table
    t = _TABLES.get(key)
    if t is None:
        t = base_integrals(lam)
    while t.level < level:
        t = extend_level(t)
    _TABLES[key] = t
    return t


def reduce(table: ReductionTable, idx: Tuple[int, int]) -> HPoly:
    return table.reduce(*idx)


# ---------------------------------------------------------------------------
# assembling I(h)
# ---------------------------------------------------------------------------

def assemble_abelian(pert: Perturbation, lam, table: Optional[ReductionTable] = None) -> HPoly:
    """I(h) = oint g dx - f dy with the dy-terms rewritten as dx-integrals."""
    if table is None:
        table = table_for(lam, pert.n)
    acc = HPoly.zero(lam)
    conv = (lambda c: c) if is_exact(lam) else float
    for (i, j), c in pert.b.items():
        if j:
            acc = acc + table.reduce(i, j).scale(conv(c))
    for (i, j), c in pert.a.items():
        if i:
            acc = acc + table.reduce(i - 1, j + 1).scale(conv(c * Fraction(i, j + 1)))
    return acc


def xi_coefficients(pert: Perturbation):
    return pert.xi()


def alpha_vector(p: HPoly, n: int) -> List[SurdScalar]:
    """Coefficients of h^1..h^n."""
    return [p.coefficient(k) for k in range(1, n + 1)]


@dataclass
class AbelianReport:
    lam: object
    n: int
    alpha: List[SurdScalar]
    roots: Optional[RootReport]

    def to_json(self) -> dict:
        return {
            "lambda": str(self.lam) if is_exact(self.lam) else repr(float(self.lam)),
            "n": self.n,
            "alpha": [a.to_str() for a in self.alpha],
            "roots": self.roots.to_json() if self.roots is not None else None,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "AbelianReport":
        lam = parse_lambda(obj["lambda"])
        roots = RootReport.from_json(obj["roots"]) if obj.get("roots") else None
        return cls(lam, int(obj["n"]), [parse_surd(a, lam) for a in obj["alpha"]], roots)


def abelian_report(pert: Perturbation, lam, with_roots: bool = True) -> AbelianReport:
    p = assemble_abelian(pert, lam)
    roots = None
    if with_roots and not p.is_zero():
        roots = count_positive_roots(p)
    return AbelianReport(lam, pert.n, alpha_vector(p, pert.n), roots)


# ---------------------------------------------------------------------------
# synthesis
# ---------------------------------------------------------------------------

@dataclass
class SynthesisResult:
    perturbation: Perturbation
    pivots: List[Tuple[str, int, int]]      # ("b", i, k) columns used
    target: List[Fraction]                   # rational coefficients of h^1..h^n


def _to_fraction(x: SurdScalar) -> Fraction:
    if x.surd == 0:
        return Fraction(x.rat)
    r = _context(x.lam)[1]
    if r is None:
        raise SingularPivot(f"synthesized coefficient {x} is not rational")
    return Fraction(x.rat + x.surd * r)


def _target_coefficients(zeros: Sequence[Fraction]) -> List[Fraction]:
    poly = [Fraction(0), Fraction(1)]            # h
    for z in zeros:
        shifted = [Fraction(0)] + poly           # h * poly
        poly = [a - z * b for a, b in zip(shifted, poly + [Fraction(0)])]
    return poly[1:]


def _column(table: ReductionTable, pivot, n: int) -> List[SurdScalar]:
    _, i, k = pivot
    p = table.reduce(i, k)
    return [p.coefficient(m) for m in range(1, n + 1)]


def _rank(vectors: List[List[Fraction]]) -> int:
    rows = [list(v) for v in vectors]
    rank, col = 0, 0
    ncols = len(rows[0]) if rows else 0
    while rank < len(rows) and col < ncols:
        piv = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for r in range(rank + 1, len(rows)):
            f = rows[r][col] / rows[rank][col]
            rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
        col += 1
    return rank


def synthesize_detailed(target_zeros: Sequence, lam, exclude: Iterable = ()) -> SynthesisResult:
    """Perturbation whose I(h) is proportional to h * prod(h - z)."""
    if not is_exact(lam):
        raise ValueError("synthesis needs an exact rational lambda")
    check_lambda(lam)
    zeros = [Fraction(z) for z in target_zeros]
    if not zeros:
        raise ValueError("need at least one target zero")
    if len(set(zeros)) != len(zeros) or any(z <= 0 for z in zeros):
        raise ValueError("target zeros must be distinct and positive")
    n = len(zeros) + 1
    table = table_for(lam, n)
    excluded = set(tuple(e) for e in exclude)
    t = _target_coefficients(zeros)
    rhs = [_pis(lam, c) for c in t]

    primary = [("b", 0, k) for k in range(1, n + 1)]
    fallback = [("b", 1, k) for k in range(2, n + 1)]
    pivots = [p for p in primary if p not in excluded]
    try:
        if len(pivots) != n:
            raise SingularMatrix("primary pivots excluded")
        cols = [_column(table, p, n) for p in pivots]
        x = solve_exact(ExactMatrix([list(r) for r in zip(*cols)], lam), rhs)
    except SingularMatrix:
        pivots, rational = [], []
        for cand in [p for p in primary + fallback if p not in excluded]:
            vec = HPoly(_column(table, cand, n), lam).rationalize()
            vec = vec + [Fraction(0)] * (n - len(vec))
            if _rank(rational + [vec]) > len(rational):
                pivots.append(cand)
                rational.append(vec)
            if len(pivots) == n:
                break
        if len(pivots) < n:
            raise SingularPivot(f"only {len(pivots)} independent pivots for n = {n}")
        cols = [_column(table, p, n) for p in pivots]
        x = solve_exact(ExactMatrix([list(r) for r in zip(*cols)], lam), rhs)
        log.info("synthesis used fallback pivots %s", pivots)
    b = {(i, k): _to_fraction(v) for (_, i, k), v in zip(pivots, x)}
    return SynthesisResult(Perturbation(n, {}, b), pivots, t)


def synthesize(target_zeros: Sequence, lam, exclude: Iterable = ()) -> Perturbation:
    return synthesize_detailed(target_zeros, lam, exclude).perturbation
