"""Exceptions raised by the capacity toolkit."""


class CapacityError(Exception):
    """Base class for every failure raised by lowsnr_capacity."""

    pass


class DomainError(CapacityError, ValueError):
    """An argument lies outside the domain of the requested operation."""

    def __init__(self, operation: str, message: str):
        super().__init__(f"{operation}: {message}")
        self.operation = operation


class ConvergenceError(CapacityError):
    """An iterative or adaptive method missed its error target."""

    def __init__(self, message: str, partial_value: float, error_estimate: float):
        super().__init__(f"{message} (partial value {partial_value!r}, error {error_estimate:.3g})")
        self.partial_value = partial_value
        self.error_estimate = error_estimate


class BracketError(CapacityError):
    """No sign change was found while expanding a root bracket."""

    def __init__(self, message: str, bracket: tuple[float, float]):
        super().__init__(f"{message} (last bracket [{bracket[0]!r}, {bracket[1]!r}])")
        self.bracket = bracket


class BoundaryMaximumError(CapacityError):
    """A maximiser landed on the upper limit of its search interval."""

    def __init__(self, message: str, bracket: tuple[float, float], argmax: float):
        super().__init__(f"{message} (argmax {argmax!r} in [{bracket[0]!r}, {bracket[1]!r}])")
        self.bracket = bracket
        self.argmax = argmax
