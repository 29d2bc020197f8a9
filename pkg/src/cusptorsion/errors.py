"""Exception hierarchy shared by all modules."""


class CuspTorsionError(Exception):
    """Base class for errors raised by this package."""


class AdmissionError(CuspTorsionError, ValueError):
    """An input violates a precondition or a declared invariant."""


class NumericalError(CuspTorsionError, ArithmeticError):
    """A numerical procedure did not reach its tolerance or exceeded a budget."""


class ParseError(CuspTorsionError, ValueError):
    """An input document is malformed; the message names the offending field."""
