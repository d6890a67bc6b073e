"""
Non-termination problems, certificates and failures.
"""
from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple

from accel.models import ProofStep, Technique
from expr.models import Formula, Var
from loops.models import Loop

NONTERM_TITLES = {
    Technique.MONOTONIC_INCREASE: 'Non-termination by monotonic increase',
    Technique.EVENTUAL_INCREASE: 'Non-termination by eventual increase',
    Technique.FIXPOINTS: 'Non-termination by fixpoints',
}


@dataclass(frozen=True)
class NontermProblem:
    """Every model of psi is a witness of non-termination for the loop restricted to checked."""

    psi: Formula
    checked: Formula
    pending: Formula
    loop: Loop
    trace: Tuple[ProofStep, ...] = ()

    @property
    def solved(self) -> bool:
        return not self.pending

    def advance(self, step: ProofStep) -> 'NontermProblem':
        return replace(
            self,
            psi=self.psi & step.added,
            checked=self.checked & Formula([step.clause]),
            pending=self.pending.without(step.clause),
            trace=self.trace + (step,),
        )

    def record(self, step: ProofStep) -> 'NontermProblem':
        if any(step.same_attempt(seen) for seen in self.trace if not seen.accepted):
            return self
        return replace(self, trace=self.trace + (step,))


@dataclass(frozen=True)
class Certificate:
    """Satisfiable formula over the program variables all of whose models diverge."""

    loop: Loop
    formula: Formula
    witness: Dict[Var, int]
    trace: Tuple[ProofStep, ...]
    simulated_steps: Optional[int] = None

    proved = True

    @property
    def leftover(self) -> Formula:
        return Formula.true()

    def with_simulation(self, steps: int) -> 'Certificate':
        return replace(self, simulated_steps=steps)


@dataclass(frozen=True)
class NontermFailure:
    """No certificate found; leftover holds the clauses that could not be processed."""

    loop: Loop
    formula: Formula
    trace: Tuple[ProofStep, ...]
    leftover: Formula
    reason: str

    proved = False
    witness = None
    simulated_steps = None
