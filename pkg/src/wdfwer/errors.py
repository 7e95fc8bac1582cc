"""Exception types shared across the package.

Two families matter to callers: ``ValidationError`` for inputs that violate a
precondition (the CLI exits with status 2) and ``ModelError`` for numerical or
model failures discovered while computing (status 3).
"""


class ValidationError(ValueError):
    """An argument is outside the domain of the operation."""


class DomainError(ValidationError):
    pass


class InfeasibleCutoffError(ValidationError):
    pass


class ModelError(ArithmeticError):
    """A dependence model cannot be used for the requested computation."""


class DegenerateModelError(ModelError):
    pass


class FactorizationError(ModelError):
    pass
