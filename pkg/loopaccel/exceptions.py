"""
Error hierarchy shared by all apps.

Each family carries the process exit code the command-line frontend uses.
"""
from typing import Sequence


class LoopAccelError(Exception):
    """Base class for every error raised by loopaccel."""

    exit_code = 1


# Input errors (exit 2)

class InputError(LoopAccelError):
    exit_code = 2


class LoopSyntaxError(InputError):
    """Malformed loop source, with a 1-based position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


class UndeclaredVariable(InputError):
    pass


class NonPolynomialUpdate(InputError):
    pass


class DisallowedConstruct(InputError):
    pass


# Analysis errors (exit 1)

class AnalysisError(LoopAccelError):
    exit_code = 1


class NonIntegerResult(AnalysisError):
    pass


class UnboundVariable(AnalysisError):
    pass


class UnsupportedComposition(AnalysisError):
    pass


class UnsupportedRecurrence(AnalysisError):
    pass


class NonTriangular(AnalysisError):
    """The update's dependency graph has a cycle through distinct variables."""

    def __init__(self, cycle: Sequence[str]):
        names = ', '.join(cycle)
        super().__init__(
            f"update is not triangular: variables {names} depend on each other "
            "(general linear updates need a Jordan normal form, which is not supported)"
        )
        self.cycle = tuple(cycle)


class ClosedFormUnavailable(AnalysisError):
    pass


class WitnessRejected(AnalysisError):
    """A simulated run left the guard before the requested number of steps."""

    def __init__(self, state, step: int):
        super().__init__(f"guard failed at step {step} starting from {state}")
        self.state = state
        self.step = step


# Solver errors (exit 3)

class SolverError(LoopAccelError):
    exit_code = 3


class SolverUnavailable(SolverError):
    pass


class ProtocolError(SolverError):
    pass


class UnsupportedTerm(SolverError):
    pass
