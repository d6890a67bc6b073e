"""
Acceleration problems, proof steps and results.
"""
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple

from closedform.models import ClosedForm
from expr.models import Atom, Clause, Formula
from loops.models import Loop
from solver.models import SolverQuery


class Technique(Enum):
    MONOTONIC_INCREASE = 'monotonic_increase'
    MONOTONIC_DECREASE = 'monotonic_decrease'
    EVENTUAL_DECREASE = 'eventual_decrease'
    EVENTUAL_INCREASE = 'eventual_increase'
    METERING = 'metering'
    FIXPOINTS = 'fixpoints'


ACCELERATION_TITLES = {
    Technique.MONOTONIC_INCREASE: 'Accelerate by monotonic increase',
    Technique.MONOTONIC_DECREASE: 'Accelerate by monotonic decrease',
    Technique.EVENTUAL_DECREASE: 'Accelerate by eventual decrease',
    Technique.EVENTUAL_INCREASE: 'Accelerate by eventual increase',
    Technique.METERING: 'Accelerate by metering function',
}


@dataclass(frozen=True)
class TechniqueResult:
    """Formula a technique contributes for one clause."""

    added: Formula
    exact: bool
    designated: Optional[Atom] = None


@dataclass(frozen=True)
class ProofStep:
    """One attempted derivation step with the solver queries it issued."""

    technique: Technique
    title: str
    clause: Clause
    added: Formula
    exact: bool
    accepted: bool = True
    designated: Optional[Atom] = None
    queries: Tuple[SolverQuery, ...] = ()
    note: Optional[str] = None

    def same_attempt(self, other: 'ProofStep') -> bool:
        return (self.technique, self.clause, self.added) == (other.technique, other.clause, other.added)

    def replay(self, client) -> bool:
        """Re-run the recorded queries and check that every verdict status is reproduced."""
        return all(client.replay(query).status is query.verdict.status for query in self.queries)

    def __str__(self):
        status = '' if self.accepted else ' [discarded]'
        return f'{self.title} on {self.clause}: {self.added}{status}'


@dataclass(frozen=True)
class AccelProblem:
    """
    The four-tuple of partial result psi, processed guard part and pending guard part.

    psi ranges over (x, n, x'); checked and pending partition the guard.
    """

    psi: Formula
    checked: Formula
    pending: Formula
    loop: Loop
    closed_form: ClosedForm
    exact: bool = True
    trace: Tuple[ProofStep, ...] = ()

    @property
    def solved(self) -> bool:
        return not self.pending

    def advance(self, step: ProofStep) -> 'AccelProblem':
        return replace(
            self,
            psi=self.psi & step.added,
            checked=self.checked & Formula([step.clause]),
            pending=self.pending.without(step.clause),
            exact=self.exact and step.exact,
            trace=self.trace + (step,),
        )

    def record(self, step: ProofStep) -> 'AccelProblem':
        """Log a discarded step without changing the problem; repeats are logged once."""
        if any(step.same_attempt(seen) for seen in self.trace if not seen.accepted):
            return self
        return replace(self, trace=self.trace + (step,))


@dataclass(frozen=True)
class AccelResult:
    """
    Outcome of acceleration.

    On success formula implies the n-step transition relation for all n > 0,
    and is equivalent to it when exact is set.
    """

    loop: Loop
    formula: Formula
    exact: bool
    trace: Tuple[ProofStep, ...]
    leftover: Formula
    closed_form: Optional[ClosedForm] = None
    reason: Optional[str] = None

    @property
    def success(self) -> bool:
        return not self.leftover and self.reason is None

    @property
    def accepted_steps(self) -> Tuple[ProofStep, ...]:
        return tuple(step for step in self.trace if step.accepted)

    @classmethod
    def from_problem(cls, problem: AccelProblem) -> 'AccelResult':
        reason = None if problem.solved else 'no technique applies to the remaining clauses'
        return cls(
            loop=problem.loop,
            formula=problem.psi,
            exact=problem.exact and problem.solved,
            trace=problem.trace,
            leftover=problem.pending,
            closed_form=problem.closed_form,
            reason=reason,
        )
