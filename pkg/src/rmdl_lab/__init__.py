"""Budgeted algorithmic-information tools on a small reference machine:
complexity estimates, shared representations, hierarchical descriptions and
a toy universal agent."""

from .bits import BitString, parse_literal
from .complexity import (Budget, ComplexityEstimate, ProbabilityEstimate, approx_algorithmic_probability,
                         approx_conditional, approx_kolmogorov, best_two_part, kraft_census)
from .machine import ExecResult, Program, Session, Status, assemble, disassemble, execute

__version__ = "0.1.0"

__all__ = [
    "BitString", "parse_literal", "Budget", "ComplexityEstimate", "ProbabilityEstimate",
    "approx_algorithmic_probability", "approx_conditional", "approx_kolmogorov",
    "best_two_part", "kraft_census", "ExecResult", "Program", "Session", "Status",
    "assemble", "disassemble", "execute", "__version__",
]
