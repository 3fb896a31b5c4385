"""Exception hierarchy shared by all fluxkit modules."""


class FluxkitError(Exception):
    """Base class for every error raised by fluxkit."""


class InvalidParameterError(FluxkitError, ValueError):
    """A parameter violates its domain (nonpositive energy, bad basis size, ...)."""


class InvalidBasisError(InvalidParameterError):
    pass


class IncompleteSolutionError(FluxkitError):
    """An eigensolution lacks the levels or matrix elements an operation needs."""


class NumericalError(FluxkitError, ArithmeticError):
    """A numerical routine failed (eigensolver non-convergence, step budget, ...)."""


class DivergentDispersiveError(NumericalError):
    """A transition sits on top of the resonator frequency in the dispersive sum."""

    def __init__(self, j, k, f_jk, f_r):
        self.j, self.k, self.f_jk, self.f_r = j, k, f_jk, f_r
        super().__init__(
            f"transition ({j},{k}) at {f_jk:.9f} GHz is within 1 kHz of the "
            f"resonator at {f_r:.9f} GHz; dispersive sum diverges"
        )


class NoCrossingError(FluxkitError):
    """The requested flux window does not bracket a level crossing."""


class UnphysicalInputError(InvalidParameterError):
    """Measured inputs are mutually inconsistent (e.g. T2 > 2 T1)."""


class CalibrationError(NumericalError):
    """Pulse amplitude calibration did not find an interior maximum."""


class StepBudgetError(NumericalError):
    """The integrator would need more steps than the allowed budget."""


class UnidentifiableError(FluxkitError):
    """The data cannot constrain the requested parameter."""


class ConfigError(FluxkitError):
    """Device configuration could not be parsed or validated."""

    def __init__(self, message, line=None, column=None):
        self.line, self.column = line, column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
