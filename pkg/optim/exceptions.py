class OptimError(Exception):
    """
    Base class for every error raised by the optim package.
    """


class DimensionMismatchError(OptimError, ValueError):
    pass


class NonFiniteError(OptimError, FloatingPointError):
    pass


class DomainError(OptimError, ValueError):
    """
    Point outside the domain of the objective, e.g. (Hx+b)_i = 0 where g_i > 0.
    """


class InfeasibleDualError(OptimError, ValueError):
    pass


class OperatorAssumptionError(OptimError, ValueError):
    """
    Operator data breaks a standing assumption (nonpositive V, negative psf, ...).
    """


class ScheduleError(OptimError, ValueError):
    pass


class InconsistentOptimumError(OptimError, ValueError):
    """
    Polyak step asked for with f(x) below the supplied optimal value.
    """


class DivergenceError(OptimError):
    """
    Raised when the epsilon-subgradient norm exceeds the configured cap.
    """
    def __init__(self, k, u_norm, cap):
        self.k = k
        self.u_norm = u_norm
        self.cap = cap
        super().__init__(f'Iteration {k}: |u| = {u_norm:.6g} exceeds cap {cap:.6g}.')


class ImageFormatError(OptimError, ValueError):
    pass


class ConvergenceError(OptimError):
    """
    Raised when a run ends with its relative f change above the requested tolerance.
    """
    def __init__(self, change, tolerance, iterations):
        self.change = change
        self.tolerance = tolerance
        self.iterations = iterations
        super().__init__(f'Not converged after {iterations} iterations: relative f change {change:.3g} '
                         f'over the last decade exceeds {tolerance:.3g}.')
