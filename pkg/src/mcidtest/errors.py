"""Exception hierarchy."""


class MCIDError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(MCIDError, ValueError):
    """An argument violates a documented precondition."""


class DimensionMismatch(InvalidInput):
    pass


class InvalidMatrix(InvalidInput):
    """Matrix fails the stochastic/symmetric/nonnegative checks."""


class ReducibleChain(MCIDError):
    """The operation requires an irreducible chain (or a nonsingular resolvent)."""


class LPError(MCIDError):
    pass


class Infeasible(LPError):
    pass


class Unbounded(LPError):
    pass


class IterationLimit(LPError):
    """Simplex hit its pivot cap; no approximate answer is returned."""


class BudgetExceeded(MCIDError):
    """Exhaustive enumeration would exceed the configured budget."""


class TrajectoryCapExceeded(MCIDError):
    """A lazily extended trajectory ran past its hard length cap."""


class InsufficientSamples(InvalidInput):
    pass


class ParseError(InvalidInput):
    """A matrix, trajectory or config file is malformed."""
