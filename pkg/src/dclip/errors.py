"""Exception hierarchy shared by every module."""


class DclipError(Exception):
    """Base class for all toolkit errors."""


class InputError(DclipError, ValueError):
    """Malformed input: dimension mismatch, bad parameter range, schema violation."""


class ParseError(InputError):
    """A JSON document does not follow the function/point schema."""


class ModulusError(InputError):
    """A modulus function h does not vanish at the origin."""

    def __init__(self, value):
        self.value = value
        super().__init__(f"modulus must satisfy h(0) = 0, got h(0) = {value!r}")


class UnsupportedConditionError(InputError):
    """The requested condition is not defined for the given modulus."""


class NumericalError(DclipError, ArithmeticError):
    """The LP kernel failed to converge (iteration cap or breakdown)."""


class CapacityError(DclipError):
    """A documented size limit was exceeded."""
