"""Exception hierarchy.

Every domain failure carries a stable ``code`` so the command line can emit a
machine-readable error object.
"""

from __future__ import annotations


class EKError(Exception):
    """Base class for all domain errors raised by the package."""

    @property
    def code(self) -> str:
        return type(self).__name__

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


class ZeroInput(EKError):
    pass


class PrecisionExhausted(EKError):
    pass


class NonResidue(EKError):
    pass


class RamifiedUnsupported(EKError):
    pass


class PTwoUnsupported(EKError):
    pass


class DomainError(EKError):
    pass


class NotIntegral(EKError):
    pass


class InsufficientPrecision(EKError):
    pass


class SearchExhausted(EKError):
    pass


class InertUnsupported(EKError):
    pass


class InadmissibleInput(EKError):
    pass


class DegenerateDenominator(EKError):
    pass


class InertProjectionFailure(EKError):
    pass


class InvalidPair(EKError):
    pass


class NotIrreducible(EKError):
    pass


class NoRealRoots(EKError):
    pass


class NoPAdicRoots(EKError):
    pass


class ParseError(EKError):
    """Malformed command-line value (usage error, not a domain error)."""
