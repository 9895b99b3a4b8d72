class W2InterpError(Exception):
    """Base class for numerical failures raised by this package."""


class RootCountMismatch(W2InterpError):
    pass


class NoConvergence(W2InterpError):
    pass


class DerivativeVanishes(W2InterpError):
    pass


class SingularSystem(W2InterpError):
    pass


class SingularBoundarySystem(SingularSystem):
    pass


class ConstraintViolation(W2InterpError):
    pass


class GridMismatch(ValueError):
    pass
