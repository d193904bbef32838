"""Exception types shared across the package.

All of them derive from ``ValueError`` so callers that only care about bad
input can catch that alone. The CLI maps each class to its own exit code.
"""


class ScenarioError(ValueError):
    """A parameter set violates a model invariant (negative loss, frames < 1, ...)."""


class UndefinedVisibilityError(ValueError):
    """Visibility requested for a fringe with neither correlated nor accidental counts."""


class NoSolutionError(ValueError):
    """The inverse problem has no root in the admissible range."""


class DegenerateFitError(ValueError):
    """The fringe samples cannot determine offset, amplitude and phase."""


class ScenarioParseError(ValueError):
    """Malformed scenario text: syntax, unknown or missing keys, non-numeric values."""
