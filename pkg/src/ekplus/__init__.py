"""Exact constructions and certified checks for (EK+) type Diophantine conditions.

Quadratic fields, truncated p-adic numbers and real balls are combined to
build integer pairs (Q, R) with small products
max(|Q|, |R|) |Q alpha - R| |Q beta - R|_p, and to check such products
independently.
"""

from .errors import EKError
from .exact import QuadElem, QuadField, RealBall, RealSpec, parse_real_spec
from .padic import PAdic, PAdicQuad, PAdicSpec, parse_padic_spec

__all__ = [
    "EKError",
    "PAdic",
    "PAdicQuad",
    "PAdicSpec",
    "QuadElem",
    "QuadField",
    "RealBall",
    "RealSpec",
    "parse_padic_spec",
    "parse_real_spec",
]

__version__ = "0.1.0"
