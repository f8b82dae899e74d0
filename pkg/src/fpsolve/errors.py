"""Exception hierarchy shared by every fpsolve module."""


class FPSolveError(Exception):
    """Base class for all fpsolve errors."""


class UnknownFamily(FPSolveError, KeyError):
    pass


class ParamOutOfRange(FPSolveError, ValueError):
    def __init__(self, param, value, rule):
        self.param = param
        self.value = value
        super().__init__(f"parameter {param!r}={value!r} violates {rule}")


class IndexAboveSpectrum(FPSolveError, IndexError):
    pass


class EvalAtSingularity(FPSolveError, ValueError):
    pass


class EvalOutsideDomain(FPSolveError, ValueError):
    pass


class DomainMismatch(FPSolveError, ValueError):
    pass


class SingularityInsideGrid(FPSolveError, ValueError):
    pass


class SingularityInsideDomain(FPSolveError, ValueError):
    pass


class NonNormalizable(FPSolveError, ArithmeticError):
    pass


class UnboundedRatio(FPSolveError, ArithmeticError):
    pass


class NoDecay(FPSolveError, ValueError):
    pass


class ConvergenceFailure(FPSolveError, RuntimeError):
    pass


class NonFiniteState(FPSolveError, FloatingPointError):
    pass


class NonFiniteValue(FPSolveError, FloatingPointError):
    pass


class FitWindowEmpty(FPSolveError, ValueError):
    pass


class NonMonotoneDecay(FPSolveError, ValueError):
    pass


class UnstableStep(FPSolveError, FloatingPointError):
    pass


class StepTooLarge(FPSolveError, ValueError):
    """``dt * max|U'|`` exceeds the sampler's stability heuristic."""


class SingularStart(FPSolveError, ValueError):
    pass


class EmptyBins(FPSolveError, ValueError):
    pass


class SpecError(FPSolveError, ValueError):
    """Invalid problem specification (CLI exit code 2)."""
