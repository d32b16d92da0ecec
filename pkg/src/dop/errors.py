"""Exception hierarchy shared by every module of the package."""


class DopError(Exception):
    """Base class for all errors raised by :mod:`dop`."""


class DomainError(DopError, ValueError):
    """A parameter lies outside the admissible domain of the weight."""


class DivergentWeight(DomainError):
    """The moment series of the requested weight does not converge."""


class SlowConvergence(DopError, ArithmeticError):
    """A lattice series did not meet its stopping rule within ``k_max`` terms."""


class NumericBreakdown(DopError, ArithmeticError):
    """A pivot vanished (or changed sign) at the working precision."""


class PoleError(DopError, ValueError):
    """Evaluation point coincides with a pole of a second kind function."""


class WindowTooSmall(DopError, ValueError):
    """The truncation is too small for the requested banded identity."""


class ZeroDenominator(NumericBreakdown):
    """A norm (or shifted norm) entering a connection matrix vanished."""


class HypothesisViolated(DopError, ValueError):
    """A non-degeneracy hypothesis of a transformation formula fails."""


class PointOnDivisor(HypothesisViolated):
    """Pointwise evaluation requested at the zero of a Christoffel factor."""


class SingularBlock(NumericBreakdown):
    """The leading block of a quasi-determinant is singular."""
