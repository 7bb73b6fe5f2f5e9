"""Numerical laboratory for partial sums of (modified) quadratic Dirichlet
characters over the k-free integers: exact sieved sums, their expansion over
zeta/L zeros, logarithmic limiting distributions, variance asymptotics, and
the linear-independence random model."""

__version__ = "0.1.0"

from .characters import (
    DirichletCharacter,
    ModifiedCharacter,
    gauss_sum,
    kronecker,
    quadratic_character,
)
from .kfree import KFreeSieve, StepSeries, SummandSpec, cumulative_series, partial_sum, sieve_kfree
from .special import EvalContext, FiniteEulerProduct, bessel_j0, l_function, zeta

__all__ = [
    "DirichletCharacter",
    "ModifiedCharacter",
    "EvalContext",
    "FiniteEulerProduct",
    "KFreeSieve",
    "StepSeries",
    "SummandSpec",
    "bessel_j0",
    "cumulative_series",
    "gauss_sum",
    "kronecker",
    "l_function",
    "partial_sum",
    "quadratic_character",
    "sieve_kfree",
    "zeta",
]
