"""
Closed forms of n-fold loop updates.
"""
from dataclasses import dataclass
from typing import Dict, List, Mapping, Tuple

from expr.models import N, Atom, PolyExp, Var


@dataclass(frozen=True)
class ClosedForm:
    """
    Per-variable expressions over (x, n) equal to the n-fold update for all n >= valid_from.

    valid_from is 0 unless some update overwrites its variable (x := p with p not
    mentioning x); such a component only follows the loop from n = 1 on.
    """

    variables: Tuple[Var, ...]
    components: Tuple[PolyExp, ...]
    valid_from: int = 0

    @property
    def mapping(self) -> Dict[Var, PolyExp]:
        return dict(zip(self.variables, self.components))

    def __getitem__(self, var: Var) -> PolyExp:
        return self.mapping[var]

    def shifted(self, k: int) -> 'ClosedForm':
        """The closed form with n replaced by n + k."""
        return ClosedForm(
            self.variables,
            tuple(c.shift_n(k) for c in self.components),
            max(self.valid_from - k, 0),
        )

    def domain(self) -> List[Atom]:
        """Atoms restricting n > 0 to the counter values the closed form is valid for."""
        if self.valid_from <= 1:
            return []
        return [Atom.gt0(PolyExp.var(N) - self.valid_from + 1)]

    def evaluate(self, state: Mapping[Var, int], steps: int) -> Dict[Var, int]:
        env = dict(state)
        env[N] = steps
        return {var: c.evaluate(env) for var, c in self.mapping.items()}

    def __str__(self):
        text = '(' + ', '.join(str(c) for c in self.components) + ')'
        return f'{text} for n >= {self.valid_from}' if self.valid_from else text
