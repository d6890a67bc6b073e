"""
Solver verdicts and recorded queries.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional

from expr.models import Formula, Var


class VerdictStatus(Enum):
    PROVED = 'proved'
    NOT_PROVED = 'not_proved'
    UNKNOWN = 'unknown'


@dataclass(frozen=True)
class SolverVerdict:
    """
    Outcome of a solver call.

    For implications NOT_PROVED carries a countermodel; for satisfiability
    checks NOT_PROVED means satisfiable (with a model) and PROVED means
    unsatisfiable.
    """

    status: VerdictStatus
    model: Optional[Dict[Var, int]] = None
    reason: Optional[str] = None

    @classmethod
    def proved(cls) -> 'SolverVerdict':
        return cls(VerdictStatus.PROVED)

    @classmethod
    def not_proved(cls, model: Dict[Var, int]) -> 'SolverVerdict':
        return cls(VerdictStatus.NOT_PROVED, model=dict(model))

    @classmethod
    def unknown(cls, reason: str) -> 'SolverVerdict':
        return cls(VerdictStatus.UNKNOWN, reason=reason)

    @property
    def is_proved(self) -> bool:
        return self.status is VerdictStatus.PROVED

    @property
    def is_unsat(self) -> bool:
        return self.status is VerdictStatus.PROVED

    @property
    def is_sat(self) -> bool:
        return self.status is VerdictStatus.NOT_PROVED

    @property
    def is_unknown(self) -> bool:
        return self.status is VerdictStatus.UNKNOWN

    def __str__(self):
        if self.is_unknown:
            return f'unknown ({self.reason})'
        return self.status.value


class QueryKind(Enum):
    IMPLICATION = 'implication'
    SAT = 'sat'


@dataclass(frozen=True)
class SolverQuery:
    """A solver call as recorded in proof traces."""

    kind: QueryKind
    premise: Formula
    conclusion: Optional[Formula]
    verdict: SolverVerdict = field(compare=False)

    def __str__(self):
        if self.kind is QueryKind.IMPLICATION:
            return f'{self.premise} ==> {self.conclusion}: {self.verdict}'
        return f'sat? {self.premise}: {self.verdict}'
