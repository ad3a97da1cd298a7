"""Exception and warning types raised across the package."""


class StackelError(Exception):
    """Base class for all errors raised by this package."""


class NonSmoothEntry(StackelError):
    pass


class NonPositiveCoefficient(StackelError):
    pass


class SingularGauge(StackelError):
    pass


class NonPositiveReparam(StackelError):
    pass


class SolverDiverged(StackelError):
    pass


class NonPositiveSolution(StackelError):
    pass


class DivisionNearZero(StackelError):
    pass


class IntegratorFailure(StackelError):
    pass


class IntegratorOverflow(StackelError):
    pass


class NewtonStall(StackelError):
    pass


class EigsolverFailure(StackelError):
    pass


class InsufficientPairs(StackelError):
    pass


class InsufficientSpectrum(StackelError):
    pass


class PoleAtDirichletEigenvalue(StackelError):
    pass


class PoleInSpectrum(StackelError):
    pass


class ConfigError(StackelError):
    """Invalid scenario or fixture input. ``field`` names the offending key."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        loc = []
        if field is not None:
            loc.append(f"field '{field}'")
        if line is not None:
            loc.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)


class TruncationWarning(UserWarning):
    """Boundary data is not well captured by the truncated harmonic basis."""
