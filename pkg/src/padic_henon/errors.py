"""Exception hierarchy shared by every module."""


class PadicError(Exception):
    """Base class for all errors raised by the package."""


class PrecisionExhausted(PadicError):
    """The precision budget ran out.

    ``index`` is the orbit/time index at which the budget died, when known.
    """

    def __init__(self, message: str = "precision budget exhausted", index: int | None = None):
        if index is not None:
            message = f"{message} (at index {index})"
        super().__init__(message)
        self.index = index


class InsufficientPrecision(PadicError):
    pass


class DivisionByZero(PadicError, ZeroDivisionError):
    pass


class NotIntegral(PadicError):
    pass


class MalformedLiteral(PadicError, ValueError):
    pass


class DenominatorNotPPower(MalformedLiteral):
    pass


class InvalidParameters(PadicError, ValueError):
    pass


class ExitsUnitPolydisc(PadicError):
    """A backward iterate provably left R^2, certifying pt is not in T^k(R^2)."""

    def __init__(self, k: int):
        super().__init__(f"backward iterate {k} leaves the unit polydisc")
        self.k = k


class Indeterminate(PadicError):
    def __init__(self, message: str = "integrality undecidable at available precision", index: int | None = None):
        if index is not None:
            message = f"{message} (at index {index})"
        super().__init__(message)
        self.index = index


class NotInUnitPolydisc(PadicError):
    pass


class NoSolutionInDisc(PadicError):
    pass


class RecursionBudgetExceeded(PadicError):
    pass


class EmptyForwardPart(PadicError):
    pass


class DepthInsufficient(PadicError):
    pass


class DegenerateSeries(PadicError):
    pass


class ConfigInvalid(PadicError):
    pass


class WindowCapExceeded(PadicError):
    """An enumeration would decode more windows than the configured cap."""
