"""Exception hierarchy for the merodual package.

Domain errors (everything below MerodualError) signal mathematically
meaningful failures; the CLI maps them to exit code 1.  Malformed input
documents raise InputFormatError, mapped to exit code 2.
"""


class MerodualError(Exception):
    """Base class for domain errors."""


class InputFormatError(Exception):
    """A JSON document or CLI argument could not be parsed."""


class ZeroDimensionError(MerodualError):
    """An operation that needs a nonzero-dimensional space got dim 0."""


class ZeroPolynomialError(MerodualError):
    """Integer-root enumeration was asked for the zero polynomial."""


class ReblockFailure(MerodualError):
    """A matrix whose spectrum must lie in Q(i) could not be split there."""


class NotDefinedError(MerodualError):
    """Operation excluded on this object (rank-one constant connections)."""


class SingularLeadingCoefficientError(MerodualError):
    """A jet that must start with an invertible coefficient does not."""


class NotStableError(MerodualError):
    """A representation required to be stable is not."""


class NotInRangeError(MerodualError):
    """A commutator equation's right-hand side is not in range(ad_T)."""


class NotFuchsianError(MerodualError):
    """Closed Schlesinger forms requested for a family with irregular part."""


class NonResonantRequiredError(MerodualError):
    """A normal form that must be non-resonant is resonant."""


class ResonantExponentError(MerodualError):
    """A family's exponent datum has a forbidden nonzero integer difference."""


class InfinityIrregularError(MerodualError):
    """The pole at infinity carries an irregular part, which is excluded."""


class LeadingCoefficientZeroError(MerodualError):
    """An irregular-type leading coefficient degenerates at this point."""


class PoleCollisionError(MerodualError):
    """Two pole positions came within the collision tolerance."""


class ResidualExceededError(MerodualError):
    """A monitored numeric residual exceeded its abort threshold."""
