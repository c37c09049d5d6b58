"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid parameter value, cross-field violation, or malformed config document."""


class NumericDivergenceError(ArithmeticError):
    """A state variable became NaN or infinite during integration."""

    def __init__(self, field: str, value: float, t: float):
        super().__init__(f"non-finite {field}={value!r} at t={t:.6f} s")
        self.field = field
        self.value = value
        self.t = t


class UnboundedResponseError(ValueError):
    """The linear model has no finite steady state (d + k_dc == 0)."""
