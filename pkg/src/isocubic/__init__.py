"""Exact Abelian integrals, zero counting and limit-cycle simulation for the
isochronous cubic Hamiltonian center."""

from .engine import (
    ReductionTable,
    assemble_abelian,
    base_integrals,
    extend_level,
    moment_integral,
    reduce,
    synthesize,
    table_for,
)
from .exactmath import HPoly, SurdScalar, count_positive_roots, solve_exact
from .perturbation import CMVParameters, Perturbation, normalize_cmv, three_cycle_system

__all__ = [
    "CMVParameters", "HPoly", "Perturbation", "ReductionTable", "SurdScalar",
    "assemble_abelian", "base_integrals", "count_positive_roots", "extend_level",
    "moment_integral", "normalize_cmv", "reduce", "solve_exact", "synthesize",
    "three_cycle_system", "table_for",
]
__version__ = "0.1.0"
