"""
Formula-level helpers on top of the expression models.
"""
import logging
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

from .models import Atom, Formula, PolyExp, Var

logger = logging.getLogger(__name__)


def _ground_binding(atom: Atom) -> Optional[Tuple[Var, Optional[Fraction]]]:
    """
    For an equation c*x + d = 0 in a single variable return (x, -d/c).

    Returns None when the atom is not such an equation.
    """
    if not atom.is_equation or atom.lhs.has_exponential():
        return None
    variables = atom.lhs.variables()
    if len(variables) != 1 or atom.lhs.total_degree() != 1:
        return None
    (var,) = variables
    coeff = atom.lhs.linear_coefficient(var)
    return var, -atom.lhs.constant_term() / coeff


def simplify_conjunction(atoms: Iterable[Atom]) -> Formula:
    """
    Simplify a conjunction of atoms.

    Constant atoms are folded, and equations fixing a single variable to a
    constant are substituted into the remaining atoms. Returns false when a
    contradiction shows up.

    Example:
        x4 + 1 > 0, 2*x4 = 0  ->  x4 = 0
    """
    pending: List[Atom] = list(dict.fromkeys(atoms))
    bound: Dict[Var, PolyExp] = {}
    anchors = set()

    changed = True
    while changed:
        changed = False
        folded: List[Atom] = []
        for atom in pending:
            if bound and atom not in anchors:
                atom = atom.substitute(bound)
            truth = atom.constant_truth()
            if truth is False:
                logger.debug(f"Conjunction folded to false at {atom}")
                return Formula.false()
            if truth is None:
                folded.append(atom)
        pending = list(dict.fromkeys(folded))

        for atom in pending:
            binding = _ground_binding(atom)
            if binding is None or binding[0] in bound:
                continue
            var, value = binding
            if value.denominator != 1:
                return Formula.false()
            bound[var] = PolyExp.const(value)
            anchors.add(atom)
            changed = True
            break

    return Formula.of_atoms(pending)
