"""Exception hierarchy shared by every weakval module."""


class WeakvalError(Exception):
    """Base class for all errors raised by weakval."""


class DomainError(WeakvalError, ValueError):
    """An analytic primitive was evaluated outside its domain."""


class ConvergenceError(WeakvalError, ArithmeticError):
    pass


class DimensionMismatch(WeakvalError, ValueError):
    pass


class OrthogonalSelection(WeakvalError, ValueError):
    """Pre- and postselected states are (numerically) orthogonal."""


class ZeroWavefunction(WeakvalError, ValueError):
    """The detector wavefunction vanishes at the extraction point."""


class UnboundVariable(WeakvalError, KeyError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"unbound variable {self.name!r}"


class ExpressionSyntaxError(WeakvalError, ValueError):
    """Malformed expression text; ``position`` is the byte offset."""

    def __init__(self, message, position):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class ScenarioParseError(WeakvalError, ValueError):
    pass


class ValidationError(WeakvalError, ValueError):
    pass


class DegenerateDensity(WeakvalError, ValueError):
    pass
