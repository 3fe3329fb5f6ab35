"""Exception types shared across the package.

Every error raised by library code derives from LabError so the experiment
runner can convert failures into failed verdicts instead of crashes.
"""


class LabError(Exception):
    """Base class for all package errors."""


class NonFiniteValue(LabError):
    """A field, sample or callback produced NaN or Inf."""


class ShapeMismatch(LabError):
    """Array shapes or grids are inconsistent."""


class SlabOutOfRange(LabError):
    """Requested unit slab is not contained in the cylinder."""


class BranchAmbiguity(LabError):
    """Square-root argument landed on the negative real axis."""


class NewtonDiverged(LabError):
    """Newton iteration failed to reach the residual tolerance.

    Carries the residual history in .trace.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class SingularJacobian(LabError):
    """Direct factorization of the Jacobian failed."""


class DegenerateData(LabError):
    """Input data is identically trivial where a nontrivial field is required."""


class MissingPotential(LabError):
    """Nonlinearity has no potential but a gradient structure is required."""


class AsymmetricA(LabError):
    """Diffusion matrix must be symmetric for this operation."""


class EigenFailure(LabError):
    """Dense eigensolve did not converge."""


class NotHyperbolic(LabError):
    """Spectral gap of the linearization is below the resolution threshold."""


class FixedPointDiverged(LabError):
    """Period-map Newton did not converge."""


class EmptyCloud(LabError):
    """Point cloud has no points."""


class NonPositiveData(LabError):
    """Log-log fit requires strictly positive abscissae and ordinates."""


class AverageNotConverged(LabError):
    """Window-doubling time average did not stabilize."""


class NonHyperbolicLimit(LabError):
    """Limit problem has a non-hyperbolic equilibrium; experiment aborted."""


class ParseError(LabError):
    """Config file is not valid JSON. Carries .line and .column."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(LabError):
    """Config violates the schema. Message names the offending field path."""


class FormatError(LabError):
    """Field CSV file is malformed."""


class IoError(LabError):
    """Filesystem operation failed."""
