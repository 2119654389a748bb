"""Exception hierarchy. CLI exit codes are keyed off these classes."""


class CircleFlowError(Exception):
    """Base class for all package errors."""


class ConfigurationError(CircleFlowError, ValueError):
    """Invalid input shape, parameter or scenario entry."""


class ConsistencyError(CircleFlowError, RuntimeError):
    """An internal numerical consistency check failed."""


class DomainError(CircleFlowError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class RangeViolation(CircleFlowError, ValueError):
    """Input has content on kernel modes of a non-invertible operator."""

    def __init__(self, mode, magnitude, tol):
        self.mode = mode
        self.magnitude = magnitude
        self.tol = tol
        super().__init__(
            f"kernel mode k={mode} carries |coeff|={magnitude:.3e} above tolerance {tol:.1e}"
        )


class UnsupportedOrder(CircleFlowError, ValueError):
    """Symbol checker requires order r >= 1."""


class ResolutionError(CircleFlowError, ValueError):
    """Input band exceeds the anti-aliasing budget of a multilinear operator."""


class NotADiffeomorphism(CircleFlowError, ValueError):
    """phi_x is not strictly positive on the refined grid."""


class DegeneratePoints(CircleFlowError, ValueError):
    """Constraint interpolation system is singular."""


class ConstraintDrift(CircleFlowError, RuntimeError):
    """Re-projection could not restore the fixed-point constraint."""


class BlowUp(CircleFlowError, RuntimeError):
    """A trajectory left the chart (or overflowed) before the final time."""

    def __init__(self, message, last_time, trajectory=None):
        super().__init__(message)
        self.last_time = last_time
        self.trajectory = trajectory


class OutsideDomain(CircleFlowError, RuntimeError):
    """exp is undefined for the requested vector (flow stops before t = 1)."""

    def __init__(self, message, attained_time):
        super().__init__(message)
        self.attained_time = attained_time


class NoConvergence(CircleFlowError, RuntimeError):
    """Shooting did not converge: target outside the observed normal neighbourhood."""

    def __init__(self, message, residual, iterate=None):
        super().__init__(message)
        self.residual = residual
        self.iterate = iterate
