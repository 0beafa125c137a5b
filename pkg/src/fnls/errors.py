"""Exception types raised across the package."""


class StepFailure(RuntimeError):
    """The adaptive integrator could not meet its tolerance at the minimum step."""

    def __init__(self, message, t=None, dt=None):
        super().__init__(message)
        self.t = t
        self.dt = dt
        self.sample_index = None


class CutoffStarvation(RuntimeError):
    """Rejection sampling under an L2 cutoff exhausted its attempt budget."""


class OverflowGuard(FloatingPointError):
    """An exponent exceeded the overflow threshold.

    ``estimate`` carries the Monte Carlo result computed with saturated
    samples, ``n_saturated`` how many samples were clipped.
    """

    def __init__(self, message, estimate=None, n_saturated=0):
        super().__init__(message)
        self.estimate = estimate
        self.n_saturated = n_saturated


class DegenerateQuadruple(ArithmeticError):
    """A nonresonant frequency quadruple produced a vanishing phase."""

    def __init__(self, message, quadruple=None):
        super().__init__(message)
        self.quadruple = quadruple


class ConfigError(ValueError):
    """Invalid experiment configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
