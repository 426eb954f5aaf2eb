"""Direct simulation of the perturbed system and its return map on {y = 0, x > 0}.

    dx/dt = -y/lam - x - x^2 + eps f(x, y)
    dy/dt =  x + 3 lam x^2 + 2 lam x^3 + y + 2 x y + eps g(x, y)

Along the unperturbed flow dH/dt = eps (H_x f + H_y g), so over one turn the
energy changes by -eps * oint (g dx - f dy) to first order: the displacement
x1 - x0 has the sign of -eps * I(h).
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import RK45
from scipy.optimize import brentq

from .perturbation import Perturbation
from .quadrature import hamiltonian


class SimulationError(RuntimeError):
    pass


class StepUnderflow(SimulationError):
    pass


class Escaped(SimulationError):
    pass


class NoReturn(SimulationError):
    pass


@dataclass(frozen=True)
class PhaseState:
    x: float
    y: float
    t: float = 0.0


@dataclass(frozen=True)
class SimParams:
    lam: float
    eps: float = 0.0
    pert: Perturbation = field(default_factory=lambda: Perturbation(0))
    rtol: float = 1e-10
    atol: float = 1e-12
    box: float = 1e3
    max_periods: float = 50.0

    def __post_init__(self):
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "eps", float(self.eps))
        if not 0 < self.lam < 1:
            raise ValueError("lambda must lie in (0, 1)")
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")

    @property
    def period(self) -> float:
        """Common period of the unperturbed orbits."""
        return 2 * math.pi * math.sqrt(self.lam / (1 - self.lam))


def vector_field(state: PhaseState, lam, eps, pert: Perturbation) -> Tuple[float, float]:
    return _make_rhs(SimParams(lam, eps, pert))(state.t, (state.x, state.y))


def _make_rhs(params: SimParams):
    lam, eps = params.lam, params.eps
    fa, gb = params.pert.float_terms()
    inv = 1.0 / lam

    def rhs(t, u):
        x, y = float(u[0]), float(u[1])
        dx = -inv * y - x - x * x
        dy = x + 3 * lam * x * x + 2 * lam * x ** 3 + y + 2 * x * y
        if eps:
            f = 0.0
            for i, j, c in fa:
                f += c * x ** i * y ** j
            g = 0.0
            for i, j, c in gb:
                g += c * x ** i * y ** j
            dx += eps * f
            dy += eps * g
        return np.array((dx, dy))

    return rhs


@dataclass
class Trajectory:
    t: List[float]
    x: List[float]
    y: List[float]
    crossings: List[Tuple[float, float]]     # (t, x) at upward crossings of y = 0, x > 0

    @property
    def end(self) -> PhaseState:
        return PhaseState(self.x[-1], self.y[-1], self.t[-1])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("t", "x", "y"))
        for row in zip(self.t, self.x, self.y):
            w.writerow([repr(v) for v in row])
        return buf.getvalue()


def integrate_orbit(start: PhaseState, params: SimParams, t_end: Optional[float] = None,
                    crossings: Optional[int] = None, record: bool = True) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) integration.

    Stops at ``t_end`` or after ``crossings`` upward crossings of the section,
    whichever comes first; crossings are located on the dense output.
    """
    if t_end is None and crossings is None:
        raise ValueError("need a stop condition")
    limit = t_end if t_end is not None else params.max_periods * params.period * crossings
    solver = RK45(_make_rhs(params), start.t, np.array([start.x, start.y], float),
                  start.t + limit, rtol=params.rtol, atol=params.atol)
    traj = Trajectory([start.t], [start.x], [start.y], [])
    while solver.status == "running":
        t_old, (x_old, y_old) = solver.t, solver.y
        solver.step()
        if solver.status == "failed":
            raise StepUnderflow(f"step size underflow at t = {solver.t}")
        x_new, y_new = solver.y
        if not (abs(x_new) <= params.box and abs(y_new) <= params.box):
            raise Escaped(f"orbit left the box at t = {solver.t}")
        if record:
            traj.t.append(solver.t)
            traj.x.append(float(x_new))
            traj.y.append(float(y_new))
        if y_old < 0 <= y_new and x_new > 0:
            dense = solver.dense_output()
            tc = brentq(lambda s: dense(s)[1], t_old, solver.t, xtol=1e-14, rtol=4 * np.finfo(float).eps)
            traj.crossings.append((tc, float(dense(tc)[0])))
            if crossings is not None and len(traj.crossings) >= crossings:
                if record:
                    traj.t[-1], traj.x[-1], traj.y[-1] = tc, float(dense(tc)[0]), 0.0
                else:
                    traj.t.append(tc)
                    traj.x.append(float(dense(tc)[0]))
                    traj.y.append(0.0)
                return traj
    if crossings is not None:
        raise NoReturn(f"fewer than {crossings} returns within t = {limit}")
    if not record:
        traj.t.append(solver.t)
        traj.x.append(float(solver.y[0]))
        traj.y.append(float(solver.y[1]))
    return traj


def poincare_return(x0: float, params: SimParams) -> float:
    if x0 <= 0:
        raise ValueError("section point must have x0 > 0")
    traj = integrate_orbit(PhaseState(x0, 0.0), params, crossings=1, record=False)
    return traj.crossings[-1][1]


def displacement(x0: float, params: SimParams) -> float:
    return poincare_return(x0, params) - x0


def section_energy(lam, x: float) -> float:
    return hamiltonian(lam, x, 0.0)


def section_point(lam, h: float) -> float:
    """x > 0 with H(x, 0) = h (H(., 0) is increasing on x > 0)."""
    if h <= 0:
        raise ValueError("energy must be positive")
    hi = 1.0
    while section_energy(lam, hi) < h:
        hi *= 2
    return brentq(lambda x: section_energy(lam, x) - h, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


@dataclass(frozen=True)
class CycleReport:
    section_x: float
    energy: float
    stability: int          # sign(P'(x) - 1): -1 attracting, +1 repelling
    bracket: Tuple[float, float]

    def to_json(self) -> dict:
        d = asdict(self)
        d["bracket"] = list(self.bracket)
        return d

    @classmethod
    def from_json(cls, obj) -> "CycleReport":
        return cls(float(obj["section_x"]), float(obj["energy"]), int(obj["stability"]),
                   tuple(float(v) for v in obj["bracket"]))


def reports_to_json(reports: Sequence[CycleReport]) -> str:
    return json.dumps([r.to_json() for r in reports])


def reports_from_json(text: str) -> List[CycleReport]:
    return [CycleReport.from_json(o) for o in json.loads(text)]


@dataclass(frozen=True)
class ScanPoint:
    x0: float
    h: float
    displacement: float


def _disp_task(args):
    x0, params = args
    return displacement(x0, params)


def _map(fn, items, threads: int):
    if threads and threads > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


def scan(params: SimParams, h_range: Tuple[float, float], grid: int, threads: int = 1) -> List[ScanPoint]:
    h_lo, h_hi = h_range
    if not 0 < h_lo < h_hi:
        raise ValueError("need 0 < h_min < h_max")
    hs = np.linspace(h_lo, h_hi, grid)
    xs = [section_point(params.lam, float(h)) for h in hs]
    ds = _map(_disp_task, [(x, params) for x in xs], threads)
    return [ScanPoint(x, float(h), d) for x, h, d in zip(xs, hs, ds)]


def scan_to_csv(points: Sequence[ScanPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("x0", "h", "displacement"))
    for p in points:
        w.writerow([repr(p.x0), repr(p.h), repr(p.displacement)])
    return buf.getvalue()


def _sign(v: float) -> int:
    return (v > 0) - (v < 0)


def _refine(args) -> CycleReport:
    lo, hi, d_lo, d_hi, params, width = args
    slope = _sign(d_hi - d_lo)
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        d_mid = displacement(mid, params)
        if _sign(d_mid) == _sign(d_lo):
            lo, d_lo = mid, d_mid
        else:
            hi, d_hi = mid, d_mid
    x = 0.5 * (lo + hi)
    return CycleReport(x, section_energy(params.lam, x), slope, (lo, hi))


def noise_floor(x0: float, params: SimParams) -> float:
    """Displacements below this are indistinguishable from integration error."""
    return 100 * (params.rtol * abs(x0) + params.atol)


def locate_cycles(params: SimParams, h_range: Tuple[float, float], grid: int = 200,
                  threads: int = 1, width: float = 1e-8,
                  points: Optional[List[ScanPoint]] = None) -> List[CycleReport]:
    """Sign changes of the displacement on an energy grid, bisected to ``width``.

    Grid points whose displacement sits below the noise floor carry no sign and
    are skipped, so an unperturbed run reports nothing.
    """
    if grid < 16:
        raise ValueError("grid must be at least 16")
    if points is None:
        points = scan(params, h_range, grid, threads)
    signed = [p for p in points if abs(p.displacement) > noise_floor(p.x0, params)]
    jobs = [(a.x0, b.x0, a.displacement, b.displacement, params, width)
            for a, b in zip(signed, signed[1:])
            if _sign(a.displacement) != _sign(b.displacement)]
    reports = _map(_refine, jobs, threads)
    return sorted(reports, key=lambda r: r.section_x)


def default_h_range(zeros: Sequence[float]) -> Tuple[float, float]:
    return 0.01, (1.5 * max(zeros) if zeros else 1.0)
