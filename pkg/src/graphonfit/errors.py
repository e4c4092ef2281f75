"""Exception hierarchy shared across the package."""


class GraphonFitError(Exception):
    """Base class for all library errors."""


class DomainError(GraphonFitError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ModelError(GraphonFitError):
    """A model precondition is violated at runtime (e.g. rho * sup f >= 1)."""


class SaturatedBlockError(ModelError):
    """A divergence or risk is undefined because a block average hit {0, 1}."""


class ConfigError(GraphonFitError):
    """An infeasible or invalid configuration (constraints, rules, files)."""


class BudgetError(GraphonFitError):
    """A combinatorial enumeration would exceed its enforced budget."""


class InternalError(GraphonFitError):
    """An internal consistency invariant failed; indicates a bug."""
