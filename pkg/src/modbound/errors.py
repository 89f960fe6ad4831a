"""Exception hierarchy shared by the library and the command-line front end."""


class ModboundError(Exception):
    """Base class for all errors raised by modbound."""


class InvalidInputError(ModboundError, ValueError):
    """An argument violates a documented precondition."""


class EvaluationError(ModboundError, ArithmeticError):
    """A Hamiltonian profile produced a non-finite value.

    The offending path coordinate is kept in ``s`` so callers can report it.
    """

    def __init__(self, message, s=None):
        super().__init__(message)
        self.s = s


class DegenerateError(ModboundError):
    """The requested construction is undefined (e.g. optimal polarizer at eps = 0)."""


class ConsistencyError(ModboundError, ArithmeticError):
    """An internal numerical identity was violated beyond tolerance."""
