"""Exception types shared across the package."""


class AsymplecticError(Exception):
    """Base class for package errors."""


class DimensionMismatchError(AsymplecticError):
    """Operands live in phase spaces of different dimension."""


class DomainExitError(AsymplecticError):
    """A trajectory left the action-space domain box.

    Carries the exit time and the last state inside the box.
    """

    def __init__(self, t_exit, state):
        super().__init__(f"trajectory left the action domain at t = {t_exit:.6g}")
        self.t_exit = t_exit
        self.state = state


class StepSizeUnderflowError(AsymplecticError):
    """The adaptive integrator could not make progress.

    Carries the last time that was reached successfully.
    """

    def __init__(self, t_last, state):
        super().__init__(f"step size underflow at t = {t_last:.6g}")
        self.t_last = t_last
        self.state = state


class UnsaturatedLatticeError(AsymplecticError):
    """A lattice operation required saturation (all elementary divisors 1)."""

    def __init__(self, divisors):
        super().__init__(f"lattice is not saturated: elementary divisors {divisors}")
        self.divisors = tuple(divisors)


class ZeroDivisorError(AsymplecticError):
    """A small divisor outside the resonance set vanished exactly.

    The caller must enlarge the resonance set or its threshold.
    """

    def __init__(self, nu, value=0.0):
        super().__init__(f"zero small divisor at harmonic {nu}; enlarge the resonance set")
        self.nu = tuple(nu)
        self.value = value


class ExpressionError(AsymplecticError):
    """Syntax or validation error in the expression grammar."""

    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ConfigError(AsymplecticError):
    """Invalid or incomplete configuration file."""


class ConvexityError(AsymplecticError):
    """The unperturbed Hamiltonian failed the convexity precondition."""


class IntegrationError(AsymplecticError):
    """An experiment integration failed; carries the partial result if any."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
