"""Exception types shared across the package."""


class SoninError(Exception):
    """Base class for all library-specific errors."""


class ParameterDomain(SoninError, ValueError):
    """A parameter lies outside the admissible domain of an operation."""


class ZeroLeadingCoefficient(SoninError, ValueError):
    """A series operation required a nonzero leading coefficient."""


class PoleError(SoninError, ValueError):
    """Evaluation requested at a pole of the function."""


class NonConvergence(SoninError, ArithmeticError):
    """A series did not reach its tail bound within the term cap."""


class PrecisionLoss(SoninError, ArithmeticError):
    """Catastrophic cancellation: |sum of terms| / |result| exceeded the guard."""


class RadiusExceeded(SoninError, ValueError):
    """A series-defined kernel was evaluated outside its convergence radius."""


class MissingDerivative(SoninError, ValueError):
    """The operation needs f' but the sampled function carries none."""


class GridTooCoarse(SoninError, ArithmeticError):
    """Estimated grid-convolution error exceeds the requested tolerance."""


class CoefficientConditionViolated(SoninError, ValueError):
    """Convolution-series coefficients do not satisfy the pairing conditions."""


class AbscissaViolation(SoninError, ValueError):
    """Laplace abscissa below the kernel's declared convergence abscissa."""


class TailBoundExceeded(SoninError, ArithmeticError):
    """The truncated Laplace tail cannot be bounded by the requested amount."""
