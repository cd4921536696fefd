# Base exception for the library, subclasses name the violated precondition.
class HolevoException(Exception):
    exit_code = 2


class SymmetryViolationError(HolevoException):
    pass


class InconsistencyError(HolevoException):
    pass


class RankDeficiencyError(HolevoException):
    pass


class ModelValidityError(HolevoException):
    pass


class DomainError(HolevoException):
    pass


class SizeError(HolevoException):
    pass


class InvertibilityError(HolevoException):
    pass


class UnidentifiableParameterError(HolevoException):
    pass


class RldUndefinedError(HolevoException):
    pass


class UnsupportedError(HolevoException):
    pass


class ConstraintError(HolevoException):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class UncertaintyViolationError(HolevoException):
    pass


class InjectivityError(HolevoException):
    pass


class SingularCovarianceError(HolevoException):
    pass


class DegenerateSpectrumError(HolevoException):
    pass


class PriorError(HolevoException):
    pass


class VanTreesRefusedError(HolevoException):
    pass


class SingularModelError(HolevoException):
    pass


class ConfigError(HolevoException):
    pass


class TableMismatchError(HolevoException):
    pass


class SolverConvergenceError(HolevoException):
    exit_code = 3

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class PrecisionError(HolevoException):
    exit_code = 4
