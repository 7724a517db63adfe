"""Exception types shared across modules."""


class ContractError(ValueError):
    """Input violates a documented precondition."""


class InfeasibleError(ValueError):
    """Constraint set is empty."""


class SolverError(RuntimeError):
    """Iterative solver failed; carries diagnostics."""

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics
