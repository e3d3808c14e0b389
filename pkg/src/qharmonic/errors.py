"""Exception hierarchy.

Input problems derive from :class:`ValueError`, numerical breakdowns from
:class:`ArithmeticError`, so callers can catch either family without importing
this module.
"""


class QHarmonicError(Exception):
    """Base class for every error raised by the package."""


# -- step-set validation ---------------------------------------------------


class ValidationError(QHarmonicError, ValueError):
    """The weights violate one of the small-step hypotheses."""


class NegativeWeight(ValidationError):
    pass


class SumNotOne(ValidationError):
    pass


class CenterNonzero(ValidationError):
    pass


class ThreeConsecutiveZeros(ValidationError):
    pass


# -- preconditions ---------------------------------------------------------


class DomainError(QHarmonicError, ValueError):
    """An argument lies outside the region where an operation is defined."""


class LevelMismatch(DomainError):
    pass


class OutOfSegment(DomainError):
    pass


class OutOfRange(DomainError):
    pass


class NotSimpleWalk(DomainError):
    pass


class RegimeError(DomainError):
    """The eigenvalue is in the wrong regime (e.g. below t0)."""


# -- numerical breakdowns --------------------------------------------------


class NumericalError(QHarmonicError, ArithmeticError):
    pass


class NoConvergence(NumericalError):
    pass


class OrderingViolation(NumericalError):
    pass


class QuadratureDisagreement(NumericalError):
    pass


class NegativeIntegrand(NumericalError):
    pass


class DegenerateLattice(NumericalError):
    pass


class DegenerateCurve(NumericalError):
    """The kernel curve degenerates beyond what the construction supports."""


class PoleAtLatticePoint(NumericalError):
    pass


class RoundTripFailure(NumericalError):
    pass


class BranchFault(NumericalError):
    pass


class DomainFault(NumericalError):
    pass


class PoleAtX4(NumericalError):
    pass


class PoleAtReference(NumericalError):
    pass


class DerivativeNonConvergence(NumericalError):
    pass


class ZeroDerivative(NumericalError):
    pass


class PoleCollision(NumericalError):
    pass


class PoleAtP(NumericalError):
    pass


class ZeroOfGamma(NumericalError):
    pass


class ZeroOfGammaTilde(NumericalError):
    pass


class OnKernelCurve(NumericalError):
    pass


class RadiusTooLarge(NumericalError):
    pass


class TorusOnKernel(NumericalError):
    pass


class GridOverflow(NumericalError, OverflowError):
    pass
