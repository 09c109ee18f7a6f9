"""Exception types shared across the package."""


class PastingError(Exception):
    """Base class for all package errors."""


class InputError(PastingError):
    """Malformed input: dangling ids, dimension mismatches, bad JSON shapes.

    Distinct from a *failed check*, which is a normal "invalid" verdict.
    """


class DimensionError(InputError):
    """A composition or boundary was requested at an impossible level."""


class BoundaryMismatch(InputError):
    """Two cells were composed along non-matching boundaries."""


class BudgetError(PastingError):
    """An enumeration exceeded its configured cap.

    Raised hard; partial results are discarded, never emitted silently.
    """


class HypothesisNotMet(PastingError):
    """A conditional check was invoked outside its hypotheses.

    Reported as "not applicable" rather than as a failure.
    """
