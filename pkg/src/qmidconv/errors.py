"""Exception and warning types shared across the package."""


class QmcError(Exception):
    """Base class for package errors."""


class FormatError(QmcError, ValueError):
    """Malformed system file or scalar token."""


class DistinctPoleViolation(QmcError, ValueError):
    """Poles are repeated or zero."""


class InvarianceViolation(QmcError, ValueError):
    """An operator does not map a subspace into itself."""


class DimensionMismatch(QmcError, ValueError):
    """Operands have incompatible shapes."""


class CollapseError(QmcError):
    """Middle convolution produced the zero space."""


class ConditionViolation(QmcError):
    """A non-degeneracy condition required by an operation fails."""


class NonFuchsianError(QmcError, ValueError):
    """A leading or constant coefficient matrix is singular."""


class DivergenceWarning(UserWarning):
    """A lattice sum does not decay at one of its ends."""
