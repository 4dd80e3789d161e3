"""Exception hierarchy shared by every module."""


class InterfereError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(InterfereError, ValueError):
    """Invalid configuration value or inconsistent configuration."""


class InputError(InterfereError, ValueError):
    """Input data violates an operation's precondition."""


class EnvelopeDegenerateError(InterfereError):
    """No anchor points were available to build a spline envelope."""


class DivergenceError(InterfereError, FloatingPointError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, learning_rate: float):
        self.epoch = epoch
        self.learning_rate = learning_rate
        super().__init__(
            f"non-finite training loss at epoch {epoch} "
            f"(learning_rate={learning_rate:g}); try a smaller learning rate"
        )


class FitError(InterfereError):
    """Least-squares fit could not be computed."""


class InfeasibleError(InterfereError, ValueError):
    """No blocklength can meet the requested error target."""


class ComponentError(InterfereError):
    """Failure while processing one decomposed component."""

    def __init__(self, component: int, cause: Exception):
        self.component = component
        self.cause = cause
        super().__init__(f"component {component}: {cause}")
