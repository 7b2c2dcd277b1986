"""Exception types shared across the toolkit."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to produce a trustworthy answer.

    Raised for integrator failures, Wronskian violations, non-convergent
    root searches and brackets without a transition.
    """


class NoTransitionError(NumericalError):
    """The searched bracket or window contains no transition."""


class CoarseGridWarning(UserWarning):
    """The finite-difference grid under-resolves the potential."""
