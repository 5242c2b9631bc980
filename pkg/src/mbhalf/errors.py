"""Exception hierarchy shared across the package."""


class MBError(Exception):
    """Base class; ``code`` is the short tag used in CLI error records."""

    code = "error"


class ParseError(MBError):
    code = "parse"


class InvariantViolation(MBError):
    code = "invariant"

    def __init__(self, field, message=""):
        self.field = field
        super().__init__(f"{field}: {message}" if message else field)


class DivergentIntegrand(MBError):
    code = "divergent"


class NonFiniteIntegrand(MBError):
    code = "nonfinite"


class PoleOnContour(MBError):
    code = "pole"


class AliasingDetected(MBError):
    code = "aliasing"


class NoContraction(MBError):
    code = "no_contraction"

    def __init__(self, message, ratios=(), lifespan_hint=None):
        self.ratios = list(ratios)
        self.lifespan_hint = lifespan_hint
        super().__init__(message)


class AlphaOne(MBError):
    code = "alpha_one"


class ParameterOutOfRange(MBError):
    code = "range"


class QuadratureUnderResolved(MBError):
    code = "under_resolved"


class NotEnoughSignal(MBError):
    code = "no_signal"


class SingularOperator(MBError):
    code = "singular"


class StepRejected(MBError):
    code = "step_rejected"


class CompatibilityWarning(UserWarning):
    """Dirichlet corner data disagree; recorded in solver meta, not raised."""
