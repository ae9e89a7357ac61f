"""Shared exception types."""


class StabilityError(ValueError):
    """The queue parameters describe an unstable system (utilization >= 1)."""


class PgfDomainError(ValueError):
    """A generating-function argument lies outside its convergence domain."""

    def __init__(self, arg: float, bound: float):
        self.arg = arg
        self.bound = bound
        super().__init__(
            f"pgf argument {arg!r} outside convergence domain |z| <= {bound!r}"
        )


class CorruptDataError(ValueError):
    """Input data violates a format or structural contract."""


class FixedPointError(RuntimeError):
    """A fixed-point iteration failed to converge."""

    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (last residual {residual:.3e})")
