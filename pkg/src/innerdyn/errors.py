"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ConstructionError(ValueError):
    """A map, target or example system was built from invalid parameters."""


class RootFindingError(RuntimeError):
    """The bracketed lift inversion failed to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class PrecisionExhausted(ArithmeticError):
    """An interior orbit came too close to the unit circle for double precision."""

    def __init__(self, n, modulus):
        super().__init__(
            f"|F_n(0)| = {modulus!r} at step n={n}: orbit within 1e-14 of the circle"
        )
        self.n = n
        self.modulus = modulus


class BudgetExceeded(RuntimeError):
    """An exact preimage computation would exceed its arc budget."""


class ContractViolation(ValueError):
    """Input maps violate a structural hypothesis (e.g. centredness)."""


class HorizonTooShort(ValueError):
    """A sequence horizon is too short to finish the requested construction.

    ``partial`` carries whatever was built before the horizon ran out.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
