"""Exception hierarchy shared by all modules.

Every failure mode that callers are expected to catch gets its own class;
everything derives from :class:`GarnierLabError` so pipeline drivers can map
numerical failures to a dedicated exit code.
"""

from __future__ import annotations


class GarnierLabError(Exception):
    """Base class for all package-specific errors."""


class DegenerateQuadratic(GarnierLabError):
    """Leading coefficient of a quadratic is zero."""


class SingularityApproach(GarnierLabError):
    """Adaptive step size underflowed; integration ran into a singular point."""

    def __init__(self, message: str, location=None):
        super().__init__(message)
        self.location = location


class PathViolation(GarnierLabError):
    """A path segment enters the exclusion zone of a declared singular set."""


class StencilFailure(GarnierLabError):
    """A finite-difference stencil point could not be evaluated."""


class TimeCollision(GarnierLabError):
    """Two deformation times coincide (or hit the fixed points 0, 1)."""


class PoleEvaluation(GarnierLabError):
    """Evaluation requested at (or too close to) a pole of the expression."""


class ConditionIIIViolated(GarnierLabError):
    """The leading coefficient X(t) of the off-diagonal entry vanishes."""


class ConditionIVViolated(GarnierLabError):
    """The zeros of the off-diagonal entry are not simple."""


class ResonantInfinity(GarnierLabError):
    """The two exponents at infinity coincide; the gauge matrix degenerates."""


class ZeroGauge(GarnierLabError):
    """The scalar gauge u vanished."""


class ReductionLocus(GarnierLabError):
    """State sits on the locus q1 + q2 = 1 where the coordinate bridge breaks."""


class NotOnReduction(GarnierLabError):
    """State/parameters do not satisfy the constraints of the PVI reduction."""


class BranchAmbiguity(GarnierLabError):
    """Two branches of a multivalued inverse are equidistant from the hint."""


class DegenerateJacobian(GarnierLabError):
    """The Jacobian of a coordinate change is (numerically) singular."""


class NearSingularPhi(GarnierLabError):
    """det of the fundamental solution dropped below the invertibility floor."""


class DiagonalCollision(GarnierLabError):
    """The two space variables collided (x = y)."""


class InfeasibleTheta(GarnierLabError):
    """Requested exponents admit no state satisfying the constraints."""


class ConfigInvalid(GarnierLabError):
    """Scenario configuration failed validation."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
