"""Exception hierarchy shared by all modules.

Every failure mode that a caller may want to distinguish gets its own class;
all of them derive from :class:`CurvnetError` so a single ``except`` clause
can catch everything raised by the library.
"""

from __future__ import annotations


class CurvnetError(Exception):
    """Base class of all library errors."""


class ImmersionError(CurvnetError, ValueError):
    """The chart Jacobian is rank deficient at the requested parameter point."""


class UmbilicAmbiguityError(CurvnetError, ValueError):
    """A principal direction was requested at an umbilic without a hint."""


class UnsupportedChartError(CurvnetError, TypeError):
    """The operation is not defined for this kind of chart."""


class ConfigError(CurvnetError, ValueError):
    """A configuration file or mapping is malformed."""


class TraceFailureError(CurvnetError, RuntimeError):
    """Integration of a curvature line broke down.

    Attributes
    ----------
    partial : object
        The polyline traced up to the failure (a :class:`~curvnet.netgen.TracedCurve`).
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class NetConstructionError(CurvnetError, RuntimeError):
    """A net could not be assembled from traced curves."""


class PatternValidationError(CurvnetError, ValueError):
    """A Monge cubic does not realize the requested umbilic pattern."""


class DegenerateStarError(CurvnetError, ValueError):
    """A vertex star has a zero-length edge, a collinear pair or a fold."""


class DegenerateTriangleError(DegenerateStarError):
    """A fan triangle is (numerically) degenerate."""


class NoSecondFaceError(CurvnetError, ValueError):
    """An edge has only one adjacent fan triangle (boundary edge)."""


class VariantOverflowError(CurvnetError, ValueError):
    """The tangent variant was requested for a dihedral angle too close to pi."""


class AreaPositivityError(CurvnetError, ArithmeticError):
    """The area-maximizing edge has a non-positive circumcentric area."""


class FitUnavailableError(CurvnetError, ValueError):
    """Fewer than two usable points for a convergence-rate fit."""
