"""Exception hierarchy.

Every concrete error belongs to exactly one class family, and every family
maps to one process exit code used by the command line front end.
"""
from __future__ import annotations


class MpertError(Exception):
    """Base class. ``locus`` names the recursion node where the error arose."""

    exit_code = 6

    def __init__(self, message: str = "", locus: str | None = None):
        super().__init__(message)
        self.locus = locus

    def __str__(self) -> str:
        msg = super().__str__()
        if self.locus:
            return f"{msg} (at {self.locus})"
        return msg


# --- input / schema -------------------------------------------------------

class ParseError(MpertError, ValueError):
    exit_code = 2


class SchemaError(ParseError):
    pass


# --- hypothesis violations -----------------------------------------------

class HypothesisError(MpertError):
    exit_code = 3


class HypothesisViolated(HypothesisError):
    pass


class BlockHypothesisViolated(HypothesisError):
    pass


class RefinementHypothesisViolated(HypothesisError):
    pass


class NotNormal(HypothesisError):
    pass


class NotReal(HypothesisError):
    pass


# --- limitations of the exact coefficient field ---------------------------

class FieldLimitation(MpertError):
    exit_code = 4


class NotASquareInField(FieldLimitation, ValueError):
    pass


class SpectrumNotSplit(FieldLimitation):
    pass


# --- tolerance / residual breaches ----------------------------------------

class ToleranceBreach(MpertError):
    exit_code = 5


class NormalityViolation(ToleranceBreach):
    pass


class PairingFailure(ToleranceBreach):
    pass


class ResidualFailure(ToleranceBreach):
    pass


# --- plain algebra errors --------------------------------------------------

class AlgebraError(MpertError):
    exit_code = 6


class DivisionByZero(AlgebraError, ZeroDivisionError):
    pass


class NegativeInput(AlgebraError, ValueError):
    pass


class DimensionMismatch(AlgebraError, ValueError):
    pass


class NotSquare(DimensionMismatch):
    pass


class NotAUnit(AlgebraError, ValueError):
    pass


class ZeroSeries(AlgebraError, ValueError):
    pass


class NotDivisible(AlgebraError, ValueError):
    pass


class OrderViolation(AlgebraError, ValueError):
    pass


class NotCoprime(AlgebraError):
    pass


class SylvesterFailure(NotCoprime):
    pass


class SingleEigenvalue(AlgebraError):
    pass


class InsufficientPowerSums(AlgebraError, ValueError):
    pass


class TooLarge(AlgebraError, ValueError):
    pass


class AllCoefficientsZero(AlgebraError, ValueError):
    pass


class NotMonomialUnit(AlgebraError, ValueError):
    pass


class NotTraceFree(AlgebraError, ValueError):
    pass


EXIT_CODES = {
    0: "success",
    1: "unexpected internal error",
    ParseError.exit_code: "parse or schema error",
    HypothesisError.exit_code: "hypothesis violation",
    FieldLimitation.exit_code: "exact field limitation",
    ToleranceBreach.exit_code: "tolerance or residual breach",
    AlgebraError.exit_code: "algebraic precondition failure",
}
