"""Exception hierarchy for the hman package."""


class HmanError(Exception):
    """Base class for all package errors."""


class ValidationError(HmanError, ValueError):
    """Input does not describe a valid network, roster or configuration."""


class NonSquareError(ValidationError):
    def __init__(self, shape):
        self.shape = tuple(shape)
        super().__init__(f"network matrix must be square, got shape {self.shape}")


class NegativeEntryError(ValidationError):
    def __init__(self, i, j, value):
        self.i, self.j, self.value = i, j, value
        super().__init__(f"negative weight {value!r} at ({i}, {j})")


class RowSumError(ValidationError):
    def __init__(self, i, actual_sum):
        self.i, self.actual_sum = i, actual_sum
        super().__init__(f"row {i} sums to {actual_sum!r}, expected 1")


class InvalidProbabilityError(ValidationError):
    def __init__(self, p):
        self.p = p
        super().__init__(f"connection probability must lie in [0, 1], got {p!r}")


class ResampleLimitExceeded(HmanError):
    def __init__(self, n, p, attempts):
        self.n, self.p, self.attempts = n, p, attempts
        super().__init__(
            f"no ergodic Erdos-Renyi graph with n={n}, p={p} after {attempts} attempts"
        )


class NumericalError(HmanError):
    """Base class for eigensolver failures."""


class ConvergenceFailure(NumericalError):
    pass


class NoSubdominantError(NumericalError):
    pass


class DegenerateEigenvectorError(NumericalError):
    pass


class NoVotersError(ValidationError):
    pass
