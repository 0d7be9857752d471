"""Exception and warning types.

Two families matter to callers (and to the CLI exit codes): bad input
(``ValidationError``, exit code 2) and numerical limits that a finer grid,
a different operating point, or a different model would fix
(``NumericalLimitError``, exit code 3).
"""


class HomfError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(HomfError, ValueError):
    """Input violates a documented precondition."""


class NumericalLimitError(HomfError, ArithmeticError):
    """A computation left the regime where its numerics are trustworthy."""


# -- validation -------------------------------------------------------------

class InvalidParameters(ValidationError):
    pass


class InvalidMoments(ValidationError):
    """Moments violate Cauchy-Schwarz, |cov| <= bw1 * bw2."""


class IncompatibleGrid(ValidationError):
    """Grid axes cannot be exchanged (or compared) exactly."""


class NotNormalized(ValidationError):
    pass


class WrongDomain(ValidationError):
    pass


# -- numerical limits -------------------------------------------------------

class GridTooCoarse(NumericalLimitError):
    pass


class GridTooNarrow(NumericalLimitError):
    pass


class Aliasing(NumericalLimitError):
    pass


class DegenerateSigma(NumericalLimitError):
    pass


class SingularPartner(NumericalLimitError):
    pass


class ZeroInformation(NumericalLimitError):
    pass


class DegenerateProbability(NumericalLimitError):
    pass


class ProbabilityOutOfRange(NumericalLimitError):
    pass


class LimitInvalid(NumericalLimitError):
    pass


# -- warnings ---------------------------------------------------------------

class NonPhysicalCfi(UserWarning):
    """Zero-delay Fisher information came out negative (antisymmetric input)."""


class BoundaryCovariance(UserWarning):
    """|cov| sits on the Cauchy-Schwarz boundary; an effective QFI may vanish."""
