"""Numerical laboratory for a weighted three-dimensional exponential sum with
monomials and the zeta-product moment it is extracted from."""

__version__ = "0.1.0"
ENGINE_VERSION = "expsum3-0.1.0"

from expsum3.errors import AccuracyError, ParameterError, ResourceError
from expsum3.params import (
    AdmissibleTuple,
    DerivedConstants,
    ExponentTriple,
    check_admissibility,
    derive_constants,
    exponent_table,
    validate_triple,
)

__all__ = [
    "ENGINE_VERSION",
    "AccuracyError",
    "ParameterError",
    "ResourceError",
    "AdmissibleTuple",
    "DerivedConstants",
    "ExponentTriple",
    "check_admissibility",
    "derive_constants",
    "exponent_table",
    "validate_triple",
]
