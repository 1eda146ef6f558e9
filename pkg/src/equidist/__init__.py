"""Equidistribution mod 1 of polynomial sequences under almost periodic perturbations.

Exact arithmetic over a declared irrational basis, validated sequence
generation, discrepancy diagnostics, independence oracles, a criterion-driven
classifier and explicit counterexample constructions.
"""

from .exactnum import Basis, IrrationalGenerator, SymbolicReal, PrecisionUnavailable
from .model import (
    PeriodicFunction,
    Perturbation,
    PiecewiseLinear,
    PolynomialSR,
    ScalarConfig,
    TorusComponent,
    TorusConfig,
    TorusMap,
    TrigBody,
    TrigTerm,
    VectorConfig,
)
from .generator import SequenceGenerator, generate
from .classifier import classify
from .constructions import (
    build_counterexample_poly,
    build_counterexample_polyvec,
    build_counterexample_scalar,
    build_counterexample_vector,
    dirichlet_simultaneous,
    nodist_construct,
    witness_find,
)

__version__ = "0.1.0"
