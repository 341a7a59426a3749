"""Exception types raised across the package."""


class RTIError(Exception):
    """Base class for all package errors."""


class ConfigRejected(RTIError):
    """The fluid configuration admits no Rayleigh-Taylor unstable equilibrium."""


class DepthTooLarge(RTIError):
    """The hydrostatic density would leave the pressure law's range before the wall."""


class ZeroVector(RTIError):
    pass


class ConvergenceFailure(RTIError):
    """Eigensolver did not reach tolerance; ``best`` carries the last iterate."""

    def __init__(self, message, best=None, s=None):
        super().__init__(message)
        self.best = best
        self.s = s


class NoGrowingMode(RTIError):
    """mu(s) >= 0: rotation has removed the growing mode at this s."""

    def __init__(self, message, s=None, mu=None):
        super().__init__(message)
        self.s = s
        self.mu = mu


class BracketFailure(RTIError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class FrameMismatch(RTIError):
    pass


class SingularCoefficient(RTIError):
    pass


class DerivativeOrderUnavailable(RTIError):
    pass


class InterfaceSample(RTIError):
    pass


class SearchExhausted(RTIError):
    def __init__(self, message, r_limit=None):
        super().__init__(message)
        self.r_limit = r_limit


class BlowupDetected(RTIError):
    pass


class NonGrowingSeries(RTIError):
    pass


class InsufficientHistory(RTIError):
    pass


class ParseError(RTIError):
    def __init__(self, message, line=None, column=None):
        loc = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ValidationErrors(RTIError):
    def __init__(self, errors):
        super().__init__("; ".join(errors))
        self.errors = list(errors)
