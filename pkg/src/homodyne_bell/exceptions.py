class AllZero(ValueError):
    """Every coefficient of a requested state is zero."""


class NonFinite(ValueError):
    """A coefficient is NaN or infinite."""


class StateSpecError(ValueError):
    """A state-spec document is malformed."""


class ProbabilityOutOfRange(ArithmeticError):
    """A closed-form probability left [0, 1/2]; points at a coefficient or table bug."""


class VerificationFailure(AssertionError):
    """A closed form disagreed with the quadrature oracle beyond tolerance."""


class ResolutionWarning(RuntimeWarning):
    """Quadrature grid too coarse: the density no longer integrates to one."""
