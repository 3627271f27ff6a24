"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures onto its documented process exit codes without a lookup table.
"""


class SingExtError(Exception):
    exit_code = 1


class ConfigurationError(SingExtError, ValueError):
    exit_code = 2


class ConditionError(SingExtError):
    """Admissibility conditions on the Gram matrix do not hold."""

    exit_code = 3


class NumericalError(SingExtError, ArithmeticError):
    exit_code = 4


class SpectralPointError(NumericalError):
    """A spectral parameter lies (numerically) on the spectrum of L."""


class PoleError(NumericalError):
    """Evaluation at a pole of a rational part (z1, or an eigenvalue of the
    reduced matrix of the B-model)."""


class ExtensionSpectrumError(NumericalError):
    """``Y - M(z) X`` is singular: z is an eigenvalue of the extension."""


class TruncationError(NumericalError):
    """A truncated series carries a tail bound above the requested tolerance."""


class ConsistencyError(NumericalError):
    """Two independent computations of the same quantity disagree."""


class DomainError(SingExtError, ValueError):
    exit_code = 2


class InvariantFailure(SingExtError):
    exit_code = 5
