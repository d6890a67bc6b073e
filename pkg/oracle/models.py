"""
Brute-force verification records.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple


@dataclass(frozen=True)
class RunTrace:
    """states[k + 1] is the update of states[k]; the guard held at states[0 .. iterations - 1]."""

    states: Tuple[Tuple[int, ...], ...]
    iterations: int

    @property
    def final(self) -> Tuple[int, ...]:
        return self.states[-1]


@dataclass(frozen=True)
class Violation:
    """
    One counterexample found by the oracle.

    kind is 'soundness', 'exactness', 'divergence' or 'recurrence'.
    """

    kind: str
    state: Tuple[int, ...]
    n: Optional[int] = None
    expected: Optional[bool] = None
    got: Optional[bool] = None
    detail: str = ''


@dataclass
class VerifyReport:
    kind: str
    checked: int = 0
    soundness_violations: List[Violation] = field(default_factory=list)
    exactness_violations: List[Violation] = field(default_factory=list)
    bounds: Dict[str, int] = field(default_factory=dict)
    exact_claimed: bool = False
    simulated_steps: Optional[int] = None
    models_checked: int = 0

    @property
    def accepted(self) -> bool:
        """No soundness violation, and no exactness violation if exactness was claimed."""
        if self.soundness_violations:
            return False
        return not (self.exact_claimed and self.exactness_violations)
