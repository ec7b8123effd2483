from typing import Optional


class WalkSearchError(Exception):
    """Base class for every error raised by the simulator"""

    def __init__(self, detail: str, context: Optional[str] = None):
        self.detail = detail
        self.context = context
        message = f"{context}: {detail}" if context else detail
        super().__init__(message)


class InvalidNetworkError(WalkSearchError, ValueError):
    """Graph, distribution or marked set violates an invariant"""

    def __init__(self, diagnostics, context: Optional[str] = None):
        if isinstance(diagnostics, str):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics), context)


class EmptyGraphError(WalkSearchError):
    pass


class DisconnectedSourceError(WalkSearchError):
    """Some vertex with positive initial probability cannot reach the marked set"""

    def __init__(self, vertices, context: Optional[str] = None):
        self.vertices = sorted(vertices)
        super().__init__(f"source vertices {self.vertices} have no path to a marked vertex", context)


class InvalidFlowError(WalkSearchError):
    def __init__(self, residual: float, context: Optional[str] = None):
        self.residual = residual
        super().__init__(f"flow conservation residual {residual:.3e} exceeds tolerance", context)


class PreconditionError(WalkSearchError):
    pass


class UnnormalizedStateError(WalkSearchError):
    def __init__(self, norm: float, context: Optional[str] = None):
        self.norm = norm
        super().__init__(f"state has norm {norm:.12f}, expected 1", context)


class InputOutsideDomainError(WalkSearchError):
    pass


class NoPositiveInputError(WalkSearchError):
    pass


class NoCollisionError(WalkSearchError):
    pass


class ScaleExceededError(WalkSearchError):
    def __init__(self, basis_size: int, limit: int, context: Optional[str] = None):
        self.basis_size = basis_size
        self.limit = limit
        super().__init__(f"instance needs {basis_size} basis states, limit is {limit}", context)


class InvalidParameterError(WalkSearchError, ValueError):
    pass


class BoundViolationError(WalkSearchError):
    """A numerically checked inequality does not hold"""
    pass


class OutputError(WalkSearchError):
    """A result file could not be written"""
    pass
