"""Exception types shared by all modules."""


class BergerError(ValueError):
    """Base class for precondition failures raised by this package."""


class DomainError(BergerError):
    """A parameter lies outside the domain of the operation."""


class ContractError(BergerError):
    """An input violates a documented invariant (unit speed, constraint, ...)."""


class DegenerateError(BergerError):
    """The configuration is degenerate (fiber case, zero radicand, ...)."""


class PoleError(DegenerateError):
    """A sample is too close to the pole of a stereographic projection."""

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = tuple(indices)
