"""
Conditional non-termination techniques.
"""
import logging
from typing import FrozenSet, Optional

from accel.models import TechniqueResult
from accel.techniques import try_eventual_increase, try_monotonic_increase
from expr.models import Atom, Clause, Formula, PolyExp, Var
from expr.services import simplify_conjunction
from loops.models import Loop
from solver.services import SMTClient

logger = logging.getLogger(__name__)


def nt_monotonic_increase(chi: Formula, checked: Formula, loop: Loop,
                          solver: SMTClient) -> Optional[TechniqueResult]:
    """checked /\\ chi(x) ==> chi(a(x)) makes chi a recurrent set."""
    return try_monotonic_increase(chi, checked, loop, solver)


def nt_eventual_increase(clause: Clause, checked: Formula, loop: Loop,
                         solver: SMTClient) -> Optional[TechniqueResult]:
    """
    For the first atom e > 0 with checked /\\ e(x) <= e(a(x)) ==> e(a(x)) <= e(a^2(x)),
    yields 0 < e(x) <= e(a(x)), a recurrent set. The result may be unsatisfiable.
    """
    return try_eventual_increase(clause, checked, loop, solver)


def var_closure(loop: Loop, expr: PolyExp) -> FrozenSet[Var]:
    """All variables expr depends on under any number of update applications."""
    closure = frozenset(expr.variables())
    while True:
        grown = closure.union(*(loop.update[var].variables() for var in closure))
        if grown == closure:
            return closure
        closure = grown


def nt_fixpoints(clause: Clause, checked: Formula, loop: Loop,
                 solver: SMTClient) -> Optional[TechniqueResult]:
    """
    Restrict to fixpoints of the variables the designated atom depends on.

    Yields e(x) > 0 /\\ x_j = a(x)_j for every x_j in the closure of e. The
    atoms are simplified; the first atom whose result is satisfiable is used.
    """
    for atom in clause:
        if atom.is_equation:
            continue
        closure = sorted(var_closure(loop, atom.lhs), key=loop.variables.index)
        equations = [Atom.eq0(PolyExp.var(var) - loop.update[var]) for var in closure]
        added = simplify_conjunction([atom] + equations)
        verdict = solver.check_sat(added)
        if verdict.is_sat:
            return TechniqueResult(added, exact=False, designated=atom)
        logger.debug(f"Fixpoints of {atom}: {added} is {verdict}")
    return None
