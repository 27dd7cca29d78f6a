"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """An input violates a documented precondition."""


class InvalidInvariants(InvalidArgument):
    """Local symplectic invariants do not describe a physical pure state."""


class NumericFailure(ArithmeticError):
    """A numerical routine failed or hit a singularity."""
