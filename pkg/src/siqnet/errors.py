"""Exception types raised across the package."""


class SiqnetError(Exception):
    """Base class for all package errors."""


class RangeError(SiqnetError, ValueError):
    """A parameter lies outside its admissible range."""

    def __init__(self, field, value, allowed):
        self.field = field
        self.value = value
        super().__init__(f"{field}={value!r} outside {allowed}")


class SubpopulationTooSmall(SiqnetError, ValueError):
    pass


class DegenerateCoverage(SiqnetError, ValueError):
    pass


class CountExceedsPopulation(SiqnetError, ValueError):
    pass


class DeadState(SiqnetError, RuntimeError):
    pass


class BackbonePresent(SiqnetError, ValueError):
    pass


class NonFiniteState(SiqnetError, FloatingPointError):
    pass


class NegativeDiscriminant(SiqnetError, ArithmeticError):
    pass


class MonotonicityViolated(SiqnetError, AssertionError):
    pass


class NotBracketed(SiqnetError, RuntimeError):
    pass
