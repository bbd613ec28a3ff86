"""Exception hierarchy shared by all flq modules."""


class FlqError(Exception):
    """Base class for every error raised by flq."""


class InvalidArgumentError(FlqError, ValueError):
    """Malformed input: wrong shape, non-finite entries, bad parameter range."""


class PreconditionError(FlqError, ValueError):
    """Input is well formed but violates an operation precondition."""


class NumericFailure(FlqError, ArithmeticError):
    """A numerical procedure failed to reach its stated accuracy."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class OutOfRangeError(FlqError, ValueError):
    """A tabulated quantity was queried outside its support."""

    def __init__(self, message, points=()):
        super().__init__(message)
        self.points = list(points)


class DegeneracyAmbiguityError(FlqError):
    """Quasifrequency clustering could not separate distinct classes."""

    def __init__(self, message, triples=()):
        super().__init__(message)
        self.triples = list(triples)


class ModelRejectionError(FlqError, ValueError):
    """A reservoir model produced a non-positive coefficient matrix."""

    def __init__(self, message, frequency=None):
        super().__init__(message)
        self.frequency = frequency


class NoStationaryStateError(NumericFailure):
    """The generator kernel holds no positive unit-trace element."""
