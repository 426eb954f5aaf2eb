"""Perturbation coefficient tables and the normal-form change of variables."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Tuple

from .exactmath import as_rational, is_exact, parse_lambda

Index = Tuple[int, int]


@dataclass(frozen=True)
class Perturbation:
    """Coefficients of eps*sum a_ij x^i y^j (in dx/dt) and eps*sum b_ij x^i y^j (in dy/dt)."""

    n: int
    a: Dict[Index, Fraction] = field(default_factory=dict)
    b: Dict[Index, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("degree must be nonnegative")
        for name in ("a", "b"):
            table = {}
            for (i, j), c in getattr(self, name).items():
                if i < 0 or j < 0 or i + j > self.n:
                    raise ValueError(f"{name}[{i},{j}] outside i+j <= {self.n}")
                c = c if isinstance(c, (Fraction, float)) else as_rational(c)
                if c != 0:
                    table[(int(i), int(j))] = c
            object.__setattr__(self, name, table)

    @classmethod
    def zero(cls, n: int) -> "Perturbation":
        return cls(n)

    def __add__(self, other: "Perturbation") -> "Perturbation":
        n = max(self.n, other.n)
        a, b = dict(self.a), dict(self.b)
        for k, c in other.a.items():
            a[k] = a.get(k, 0) + c
        for k, c in other.b.items():
            b[k] = b.get(k, 0) + c
        return Perturbation(n, a, b)

    def scaled(self, c) -> "Perturbation":
        return Perturbation(self.n, {k: v * c for k, v in self.a.items()},
                            {k: v * c for k, v in self.b.items()})

    def xi(self) -> Dict[Index, Fraction]:
        """Coefficient of each I_{i,j} (j >= 1) after converting the dy-terms.

        xi_{i,j} = b_{i,j} + (i+1)/j * a_{i+1,j-1}.
        """
        out: Dict[Index, Fraction] = {}
        for (i, j), c in self.b.items():
            if j >= 1:
                out[(i, j)] = out.get((i, j), 0) + c
        for (i, j), c in self.a.items():
            if i >= 1:
                key = (i - 1, j + 1)
                out[key] = out.get(key, 0) + c * Fraction(i, j + 1)
        return {k: v for k, v in out.items() if v != 0}

    # -- float evaluation used by the oracles ------------------------------
    def float_terms(self):
        return ([(i, j, float(c)) for (i, j), c in sorted(self.a.items())],
                [(i, j, float(c)) for (i, j), c in sorted(self.b.items())])

    # -- serialization ------------------------------------------------------
    def to_json(self, lam=None) -> dict:
        obj = {}
        if lam is not None:
            obj["lambda"] = str(lam) if is_exact(lam) else repr(float(lam))
        obj["n"] = self.n
        obj["a"] = [[i, j, str(c)] for (i, j), c in sorted(self.a.items())]
        obj["b"] = [[i, j, str(c)] for (i, j), c in sorted(self.b.items())]
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "Perturbation":
        def table(rows):
            return {(int(i), int(j)): as_rational(str(c)) for i, j, c in rows}

        return cls(int(obj["n"]), table(obj.get("a", [])), table(obj.get("b", [])))


def load_perturbation(path):
    """Read a perturbation JSON file; returns (Perturbation, lam or None)."""
    with open(path) as fh:
        obj = json.load(fh)
    lam = parse_lambda(obj["lambda"]) if "lambda" in obj else None
    return Perturbation.from_json(obj), lam


def dump_perturbation(pert: Perturbation, lam=None) -> str:
    return json.dumps(pert.to_json(lam), sort_keys=False)


def three_cycle_system() -> Perturbation:
    """The n = 4 example with three limit cycles at lam = 1/2."""
    return Perturbation(4, b={
        (0, 1): Fraction(2), (1, 2): Fraction(15, 2), (2, 1): Fraction(-20),
        (2, 2): Fraction(-245, 8), (1, 3): Fraction(40), (0, 4): Fraction(25),
    })


# ---------------------------------------------------------------------------
# normal form
# ---------------------------------------------------------------------------

class ZeroParameter(ValueError):
    pass


@dataclass(frozen=True)
class CMVParameters:
    """H1 = k1^2 x^2 + (k2 y + k3 x + k4 x^2)^2."""

    k1: Fraction
    k2: Fraction
    k3: Fraction
    k4: Fraction

    def __post_init__(self):
        for name in ("k1", "k2", "k3", "k4"):
            object.__setattr__(self, name, as_rational(getattr(self, name)))


@dataclass(frozen=True)
class NormalForm:
    lam: Fraction
    time_scale: Fraction   # t1 = time_scale * t
    x_scale: Fraction      # x1 = x_scale * x
    y_scale: Fraction      # y1 = y_scale * y

    @property
    def scales(self):
        return self.time_scale, self.x_scale, self.y_scale

    def to_normal(self, x, y, t=0):
        return self.x_scale * x, self.y_scale * y, self.time_scale * t

    def from_normal(self, x1, y1, t1=0):
        return x1 / self.x_scale, y1 / self.y_scale, t1 / self.time_scale


def normalize_cmv(k: CMVParameters) -> NormalForm:
    """Map the four-parameter isochronous Hamiltonian system to the one-parameter form."""
    if k.k1 == 0 or k.k2 == 0:
        raise ZeroParameter("k1 and k2 must be nonzero for an isochronous center")
    if k.k3 == 0 or k.k4 == 0:
        raise ZeroParameter("the rescaling needs k3 != 0 and k4 != 0")
    denom = k.k1 ** 2 + k.k3 ** 2
    return NormalForm(
        lam=k.k3 ** 2 / denom,
        time_scale=2 * k.k2 * k.k3,
        x_scale=k.k4 / k.k3,
        y_scale=k.k2 * k.k4 / denom,
    )


def cmv_vector_field(k: CMVParameters, x, y):
    """Right-hand side of the Hamiltonian system of H1 (original coordinates)."""
    k1, k2, k3, k4 = k.k1, k.k2, k.k3, k.k4
    inner = k2 * y + k3 * x + k4 * x * x
    return -2 * k2 * inner, 2 * k1 ** 2 * x + 2 * (k3 + 2 * k4 * x) * inner
