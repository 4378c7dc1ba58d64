"""Twist-minimal trace formula for Maass forms with nebentypus."""

from .chars import DirichletChar, PrimeLocalChar, enumerate_chars, is_minimal
from .testfun import TestPair, build_test_pair
from .trace import geom_full, geom_full_sieved, geom_min, qform, minimize_constrained

__all__ = [
    "DirichletChar",
    "PrimeLocalChar",
    "enumerate_chars",
    "is_minimal",
    "TestPair",
    "build_test_pair",
    "geom_min",
    "geom_full",
    "geom_full_sieved",
    "qform",
    "minimize_constrained",
]
__version__ = "0.1.0"
