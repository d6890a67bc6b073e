"""
Conditional acceleration techniques.

Each technique accelerates a part chi of the guard while assuming the
already processed part `checked`; a None result means the premise could not
be proved (NOT_PROVED and UNKNOWN alike).
"""
import logging
from typing import Optional

from closedform.models import ClosedForm
from expr.models import Atom, Clause, Formula, N, PolyExp
from loops.models import Loop
from loops.services import apply_update
from solver.services import SMTClient

from .models import TechniqueResult

logger = logging.getLogger(__name__)


def _proves(solver: SMTClient, premise: Formula, conclusion: Formula) -> bool:
    verdict = solver.check_implication(premise, conclusion)
    logger.debug(f"{premise} ==> {conclusion}: {verdict}")
    return verdict.is_proved


def try_monotonic_increase(chi: Formula, checked: Formula, loop: Loop,
                           solver: SMTClient) -> Optional[TechniqueResult]:
    """checked /\\ chi(x) ==> chi(a(x)) yields chi(x); exact."""
    if _proves(solver, checked & chi, apply_update(chi, loop.update)):
        return TechniqueResult(chi, exact=True)
    return None


def try_monotonic_decrease(chi: Formula, checked: Formula, loop: Loop, closed_form: ClosedForm,
                           solver: SMTClient) -> Optional[TechniqueResult]:
    """
    checked /\\ chi(a(x)) ==> chi(x) yields chi(a^(n-1)(x)); exact.

    When the closed form only holds from some n on, the result is restricted
    to those n and is no longer exact.
    """
    if _proves(solver, checked & apply_update(chi, loop.update), chi):
        before_last = closed_form.shifted(-1)
        domain = before_last.domain()
        added = chi.substitute(before_last.mapping) & Formula.of_atoms(domain)
        return TechniqueResult(added, exact=not domain)
    return None


def try_eventual_decrease(clause: Clause, checked: Formula, loop: Loop, closed_form: ClosedForm,
                          solver: SMTClient) -> Optional[TechniqueResult]:
    """
    Once e stops increasing it never increases again.

    For the first atom e > 0 of the clause with
    checked /\\ e(x) >= e(a(x)) ==> e(a(x)) >= e(a^2(x)),
    yields e(x) > 0 /\\ e(a^(n-1)(x)) > 0. Exact iff the clause is that single atom.
    """
    before_last = closed_form.shifted(-1)
    domain = before_last.domain()
    for atom in clause:
        if atom.is_equation:
            continue
        e = atom.lhs
        e1 = apply_update(e, loop.update, 1)
        e2 = apply_update(e, loop.update, 2)
        premise = checked & Formula.of_atoms([Atom.geq0(e - e1)])
        if _proves(solver, premise, Formula.of_atoms([Atom.geq0(e1 - e2)])):
            added = Formula.of_atoms([atom, Atom.gt0(e.substitute(before_last.mapping)), *domain])
            return TechniqueResult(added, exact=len(clause) == 1 and not domain, designated=atom)
    return None


def try_eventual_increase(clause: Clause, checked: Formula, loop: Loop,
                          solver: SMTClient) -> Optional[TechniqueResult]:
    """
    Once e starts increasing it never decreases again.

    For the first atom e > 0 of the clause with
    checked /\\ e(x) <= e(a(x)) ==> e(a(x)) <= e(a^2(x)),
    yields 0 < e(x) <= e(a(x)). Never exact; the result may be unsatisfiable.
    """
    for atom in clause:
        if atom.is_equation:
            continue
        e = atom.lhs
        e1 = apply_update(e, loop.update, 1)
        e2 = apply_update(e, loop.update, 2)
        premise = checked & Formula.of_atoms([Atom.geq0(e1 - e)])
        if _proves(solver, premise, Formula.of_atoms([Atom.geq0(e2 - e1)])):
            added = Formula.of_atoms([atom, Atom.geq0(e1 - e)])
            return TechniqueResult(added, exact=False, designated=atom)
    return None


def validate_metering(loop: Loop, chi: Formula, checked: Formula, metering: PolyExp,
                      solver: SMTClient) -> Optional[TechniqueResult]:
    """
    Check that mf is a metering function for chi under checked.

    Conditions: checked /\\ chi ==> mf(x) - mf(a(x)) <= 1, and
    checked /\\ not chi ==> mf(x) <= 0 (checked as checked /\\ mf(x) > 0 ==> chi).
    Yields n < mf(x) + 1; sound, not exact.
    """
    decrease = Atom.geq0(1 - metering + apply_update(metering, loop.update))
    if not _proves(solver, checked & chi, Formula.of_atoms([decrease])):
        return None
    if not _proves(solver, checked & Formula.of_atoms([Atom.gt0(metering)]), chi):
        return None
    bound = Atom.gt0(metering - PolyExp.var(N) + 1)
    return TechniqueResult(Formula.of_atoms([bound]), exact=False)
