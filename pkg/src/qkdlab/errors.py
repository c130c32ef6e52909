"""Exception types shared across the package.

All of these subclass ValueError so that callers who do not care about the
distinction can catch a single familiar type.  The command line maps any of
them to exit code 2 (bad input), reserving 3 for unexpected numerical
failures.
"""


class QkdLabError(ValueError):
    """Base class for every error raised deliberately by this package."""


class DimensionError(QkdLabError):
    """Operands have incompatible or invalid dimensions."""


class ValidationError(QkdLabError):
    """An input violates a structural invariant (norm, trace, orthonormality)."""


class DomainError(QkdLabError):
    """A scalar argument lies outside the function's domain."""


class DegenerateSourceError(QkdLabError):
    """The source states do not determine the requested parameterization."""


class CertificationUnavailableError(QkdLabError):
    """The characterization is too weak for the requested bound to certify anything."""
