"""
Single-path integer loops: while guard do x := update(x).
"""
from dataclasses import dataclass
from typing import Dict, Mapping, Sequence, Tuple

from expr.models import Formula, N, PolyExp, Var


@dataclass(frozen=True)
class Update:
    """Simultaneous assignment, one integer polynomial per program variable."""

    assignments: Tuple[Tuple[Var, PolyExp], ...]

    @classmethod
    def from_mapping(cls, variables: Sequence[Var], mapping: Mapping[Var, PolyExp]) -> 'Update':
        return cls(tuple((var, mapping.get(var, PolyExp.var(var))) for var in variables))

    @property
    def mapping(self) -> Dict[Var, PolyExp]:
        return dict(self.assignments)

    def __getitem__(self, var: Var) -> PolyExp:
        return self.mapping[var]

    def power(self, k: int) -> Dict[Var, PolyExp]:
        """The k-fold update as a substitution; k = 0 is the identity."""
        if k < 0:
            raise ValueError('update powers must be natural')
        current = {var: PolyExp.var(var) for var, _ in self.assignments}
        for _ in range(k):
            current = {var: rhs.substitute(current) for var, rhs in self.assignments}
        return current

    def step(self, state: Mapping[Var, int]) -> Dict[Var, int]:
        """Apply the update to a concrete state."""
        return {var: rhs.evaluate(state) for var, rhs in self.assignments}


@dataclass(frozen=True)
class Loop:
    """
    A loop over ordered program variables.

    The guard is in CNF over atoms e > 0; the update is total.
    """

    variables: Tuple[Var, ...]
    guard: Formula
    update: Update

    def __post_init__(self):
        declared = set(self.variables)
        if N in declared:
            raise ValueError('the counter n cannot be a program variable')
        if len(declared) != len(self.variables):
            raise ValueError('duplicate program variables')
        undeclared = self.guard.variables() - declared
        if undeclared:
            raise ValueError(f"guard mentions undeclared variables: {sorted(v.name for v in undeclared)}")
        if tuple(var for var, _ in self.update.assignments) != self.variables:
            raise ValueError('update must assign every program variable in declaration order')
        for var, rhs in self.update.assignments:
            if not rhs.is_integer_polynomial() or not rhs.variables() <= declared:
                raise ValueError(f'update of {var} is not an integer polynomial over the program variables')

    @property
    def dimension(self) -> int:
        return len(self.variables)

    def state(self, values: Sequence[int]) -> Dict[Var, int]:
        return dict(zip(self.variables, values))

    def vector(self, state: Mapping[Var, int]) -> Tuple[int, ...]:
        return tuple(state[var] for var in self.variables)
