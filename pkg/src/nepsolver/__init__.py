"""Solver library for nonlinear eigenvalue problems M(lambda) x = 0,
M(lambda)* y = 0, built around a two-sided Lanczos iteration carried out
implicitly on the companion operator of the problem's Taylor expansion.

Includes an infinite Arnoldi baseline, a dense truncation oracle for
verification, and an experiment CLI (``nep``).
"""

from . import bilanczos, iar, linalg, nep, oracle
from .bilanczos import Options, RitzTriplet, condition_number, residuals, solve
from .errors import (
    Breakdown,
    BranchCut,
    DegenerateDerivative,
    DimensionMismatch,
    InvariantViolation,
    LuckyBreakdown,
    NepSolverError,
    NoConvergence,
    OutsideRadius,
    ParseError,
    SingularMatrix,
)
from .iar import ArnoldiOptions, iar_solve
from .nep import (
    ExpFamily,
    PolyFamily,
    ShiftScale,
    SplitNep,
    SqrtFamily,
    load_problem,
    make_dep,
    make_dep_random,
    make_gun,
    make_pep,
)

__all__ = [
    "ArnoldiOptions",
    "Breakdown",
    "BranchCut",
    "DegenerateDerivative",
    "DimensionMismatch",
    "ExpFamily",
    "InvariantViolation",
    "LuckyBreakdown",
    "NepSolverError",
    "NoConvergence",
    "Options",
    "OutsideRadius",
    "ParseError",
    "PolyFamily",
    "RitzTriplet",
    "ShiftScale",
    "SingularMatrix",
    "SplitNep",
    "SqrtFamily",
    "bilanczos",
    "condition_number",
    "iar",
    "iar_solve",
    "linalg",
    "load_problem",
    "make_dep",
    "make_dep_random",
    "make_gun",
    "make_pep",
    "nep",
    "oracle",
    "residuals",
    "solve",
]

__version__ = "0.1.0"
