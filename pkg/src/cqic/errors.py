"""Exception types shared across the package."""


class CqicError(Exception):
    """Base class for all package-specific errors."""


class NotHermitian(CqicError):
    """Matrix handed to a Hermitian-only routine is not Hermitian."""


class DimensionMismatch(CqicError):
    """Factor dimensions do not multiply out to the operator dimension."""


class InvalidState(CqicError):
    """Operator fails density-operator checks beyond tolerance."""


class UnknownRegister(CqicError):
    """Entropy query names a register the state does not carry."""


class OverlappingQueries(CqicError):
    """Mutual-information arguments share a register."""


class DomainError(CqicError):
    """Scalar argument outside its documented domain."""


class LengthMismatch(CqicError):
    """Vector length incompatible with the code parameters."""


class IncompatiblePair(CqicError):
    """Code pair over different prime moduli."""


class TooLarge(CqicError):
    """Requested enumeration exceeds the hard cap."""


class NotPrime(CqicError):
    """Field modulus is not a prime."""


class Unsupported(CqicError):
    """Operation defined only for a narrower input class."""


class ConfigMismatch(CqicError):
    """Distribution/alphabet configuration inconsistent with the channel."""


class Not3to1(CqicError):
    """Channel lacks the required one-sided interference structure."""


class NumericalFailure(CqicError):
    """Iterative numeric routine failed to converge (should be unreachable)."""


class BudgetExceeded(CqicError):
    """Grid or trial count exceeds the configured budget."""


class ZeroMassCoset(CqicError):
    """Every codeword of the coset has zero likelihood mass."""


class NotUnit(CqicError):
    """Vector expected to be normalized is not."""


class DimOverflow(CqicError):
    """Extended tilting space would exceed the dimension cap."""


class InvalidOperands(CqicError):
    """Operator-inequality inputs are not PSD/contractive as required."""


class DegenerateEnsemble(CqicError):
    """Ensemble average state has rank zero."""


class ParseError(CqicError):
    """Command-line or file input could not be parsed."""
