"""Exception hierarchy.

Validation errors (bad input) and numerical errors (a computation could not
meet its contract) are kept apart so callers such as the CLI can map them to
different exit codes.
"""


class RuinError(Exception):
    """Base class for all package errors."""


class ValidationError(RuinError, ValueError):
    """Input does not describe a valid problem."""


class NumericalError(RuinError, ArithmeticError):
    """A numerical routine failed to meet its accuracy contract."""


# payoff
class NegativeProbability(ValidationError):
    pass


class MassNotOne(ValidationError):
    pass


class ZeroFloorMass(ValidationError):
    pass


class TailNotAchievable(ValidationError):
    pass


class DegreeTooSmall(ValidationError):
    pass


class ZeroArgument(ValidationError):
    pass


class SpecFormatError(ValidationError):
    pass


# rootfinder
class NoInteriorRoot(NumericalError):
    pass


class RootCountMismatch(NumericalError):
    pass


class ResidualTooLarge(NumericalError):
    pass


# ruin
class ImaginaryResidue(NumericalError):
    pass


class RootsNotDistinct(NumericalError):
    pass


class PhiOverflow(NumericalError):
    pass


# oracles
class NotConverged(NumericalError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class SingularSystem(NumericalError):
    pass
