"""
Run configuration shared by the analysis engines and the command-line frontend.
"""
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import FrozenSet, Optional, Tuple

from django.conf import settings

from solver.services import SMTClient

TECHNIQUE_NAMES = frozenset({
    'monotonic_increase',
    'monotonic_decrease',
    'eventual_decrease',
    'eventual_increase',
    'metering',
    'fixpoints',
})


class Mode(Enum):
    ACCELERATE = 'accelerate'
    NONTERM = 'nonterm'
    BOTH = 'both'


class OutputFormat(Enum):
    TEXT = 'text'
    JSON = 'json'
    SMTLIB = 'smtlib'


@dataclass(frozen=True)
class Config:
    mode: Mode = Mode.ACCELERATE
    solver_path: str = 'z3'
    solver_args: Tuple[str, ...] = ('-smt2', '-in')
    timeout_ms: int = 10000
    verify: bool = False
    box: Optional[int] = None
    max_n: int = 10
    sim_steps: int = 1000
    extra_models: int = 10
    output: OutputFormat = OutputFormat.TEXT
    trace: bool = False
    jobs: int = 1
    disabled: FrozenSet[str] = field(default_factory=frozenset)
    metering: Optional[str] = None

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise ValueError('timeout must be positive')
        if self.jobs < 1:
            raise ValueError('jobs must be at least 1')
        if self.box is not None and self.box < 0:
            raise ValueError('box must be non-negative')
        if self.max_n < 1 or self.sim_steps < 0 or self.extra_models < 0:
            raise ValueError('verification bounds must be non-negative (max-n at least 1)')
        unknown = set(self.disabled) - TECHNIQUE_NAMES
        if unknown:
            raise ValueError(f"unknown techniques: {', '.join(sorted(unknown))}")

    @classmethod
    def from_settings(cls, **overrides) -> 'Config':
        """Defaults from Django settings, then explicit overrides (None values are ignored)."""
        base = cls(
            solver_path=settings.LOOPACCEL_SMT_BIN,
            solver_args=tuple(settings.LOOPACCEL_SMT_ARGS),
            timeout_ms=settings.LOOPACCEL_TIMEOUT_MS,
            box=settings.LOOPACCEL_VERIFY_BOX,
            max_n=settings.LOOPACCEL_VERIFY_MAX_N,
            sim_steps=settings.LOOPACCEL_SIM_STEPS,
            extra_models=settings.LOOPACCEL_EXTRA_MODELS,
        )
        return replace(base, **{key: value for key, value in overrides.items() if value is not None})

    def box_for(self, dimension: int) -> int:
        if self.box is not None:
            return self.box
        return 3 if dimension <= 3 else 2

    def enabled(self, technique: str) -> bool:
        return technique not in self.disabled

    def make_solver(self) -> SMTClient:
        return SMTClient(self.solver_path, self.solver_args, self.timeout_ms)
