"""Exception types raised by the library."""


class InputError(ValueError):
    """Malformed or inconsistent user input (shapes, NaNs, bad names)."""


class DegenerateDataError(RuntimeError):
    """The data admit no usable kernel translate (e.g. all points coincide)."""
