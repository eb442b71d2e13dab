class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class BudgetError(RuntimeError):
    """An exact computation would exceed its enumeration budget."""


class DegenerateMeasureError(ValueError):
    """A Gibbs normalization is impossible because every weight vanishes."""
