"""Exception hierarchy shared by every module."""


class OrthetaError(Exception):
    """Base class; the CLI maps subclasses of ValidationError to exit code 3."""


class ValidationError(OrthetaError, ValueError):
    pass


class NumericFailure(OrthetaError, ArithmeticError):
    pass


# lattice construction and splitting
class OddDiagonal(ValidationError):
    pass


class Degenerate(ValidationError):
    pass


class NotSymmetric(ValidationError):
    pass


class NoneFound(OrthetaError, LookupError):
    pass


class NotIsotropic(ValidationError):
    pass


class NotPrimitive(ValidationError):
    pass


class NotInLattice(ValidationError):
    pass


class NotInMPrime(ValidationError):
    pass


class InvalidTower(ValidationError):
    pass


class BudgetExceeded(NumericFailure):
    pass


class EmptySlice(ValidationError):
    pass


# Weil representation
class BadSymbol(ValidationError):
    pass


# polynomials
class NotHarmonic(ValidationError):
    pass


class BadPolynomialGrading(ValidationError):
    pass


# special functions
class DomainError(ValidationError):
    pass


class PoleAtC(ValidationError):
    pass


class DivergentRegion(ValidationError):
    pass


class OutsideDomain(ValidationError):
    pass


class DimensionTooLarge(ValidationError):
    pass


# theta series
class NotInOrthogonalGroup(ValidationError):
    pass


NotOrthogonal = NotInOrthogonalGroup


class TruncationInsufficient(NumericFailure):
    pass


# modular forms
class SupportViolation(ValidationError):
    pass


class WeightMismatch(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class NontrivialDiscriminant(ValidationError):
    pass


class NotEven(ValidationError):
    pass


class HorizonExceeded(ValidationError):
    pass


# lift engine
class StrategyUnavailable(ValidationError):
    pass


class DegenerateLambda(ValidationError):
    pass


class ConvergenceViolated(ValidationError):
    pass


class BadSignature(ValidationError):
    pass


class BadResolution(ValidationError):
    pass
