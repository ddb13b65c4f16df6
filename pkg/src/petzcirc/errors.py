"""Exception hierarchy shared by every module of the package."""


class PetzError(Exception):
    """Base class for all errors raised by petzcirc."""


class NotHermitian(PetzError, ValueError):
    pass


class NotPSD(PetzError, ValueError):
    pass


class NotIsometry(PetzError, ValueError):
    pass


class NotUnitary(PetzError, ValueError):
    pass


class NotTracePreserving(PetzError, ValueError):
    pass


class NotNormalized(PetzError, ValueError):
    pass


class NotDensity(PetzError, ValueError):
    pass


class OutOfRange(PetzError, ValueError):
    pass


class DimMismatch(PetzError, ValueError):
    pass


class Unsupported(PetzError, ValueError):
    pass


class UnknownMethod(PetzError, ValueError):
    pass


class ConfigError(PetzError, ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


class NumericalFailure(PetzError, ArithmeticError):
    """A computation produced a result outside its guaranteed bounds (CLI exit code 3)."""


class ZeroProbability(NumericalFailure):
    """Post-selection on an outcome whose probability is (numerically) zero."""


class NoCrossing(NumericalFailure):
    """The encoded fidelity never exceeds the unencoded baseline in the scanned range."""
