"""Exception types shared across the toolkit."""


class LambdaMHDError(Exception):
    """Base class for all toolkit errors."""


class ParseError(LambdaMHDError):
    """Malformed state, tree, config or field file."""


class PreconditionViolated(LambdaMHDError):
    """A decomposition was asked for a state outside the stage's admissible set.

    ``bound`` names the violated inequality so callers can report it.
    """

    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound


class ConstraintViolated(LambdaMHDError):
    """The state has a nonzero helicity density a.b, so it lies outside the hull."""


class DegenerateScale(LambdaMHDError):
    """Float inputs too small to be resolved; use the rational backend."""


class FrameDegenerate(LambdaMHDError):
    """No adapted frame could be built from the given data."""


class NotSolenoidal(LambdaMHDError):
    """A field expected to be divergence-free is not (within tolerance)."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NoScaleFound(LambdaMHDError):
    """No power-of-two scale brings the fields into the hull."""


class NontrivialityFailed(LambdaMHDError):
    """A generated subsolution has u or b identically zero on the grid."""


class FormatMismatch(LambdaMHDError):
    """Field files disagree on grid, dimension or time axis."""
