"""
The acceleration calculus: canonical problems and the derivation engine.
"""
import logging
import time
from typing import List, Optional, Tuple

from closedform.services import solve_closed_form
from expr.models import Atom, Clause, Formula, PolyExp
from loopaccel.config import Config
from loopaccel.exceptions import ClosedFormUnavailable, NonTriangular, UnsupportedRecurrence
from loops.models import Loop
from loops.parser import parse_polyexp
from solver.services import SMTClient

from .models import ACCELERATION_TITLES, AccelProblem, AccelResult, ProofStep, Technique, TechniqueResult
from .techniques import (
    try_eventual_decrease,
    try_eventual_increase,
    try_monotonic_decrease,
    try_monotonic_increase,
    validate_metering,
)

logger = logging.getLogger(__name__)

PRIORITIES = (
    Technique.MONOTONIC_INCREASE,
    Technique.MONOTONIC_DECREASE,
    Technique.EVENTUAL_DECREASE,
    Technique.EVENTUAL_INCREASE,
)


def canonical_problem(loop: Loop) -> AccelProblem:
    """
    Problem with psi binding x' to the closed form, nothing checked, the whole guard pending.

    Raises:
        ClosedFormUnavailable: The update has no closed form in the supported fragment
    """
    try:
        closed_form = solve_closed_form(loop)
    except (NonTriangular, UnsupportedRecurrence) as e:
        raise ClosedFormUnavailable(str(e)) from e

    bindings = Formula.of_atoms(
        Atom.eq0(PolyExp.var(var.primed) - closed_form[var]) for var in loop.variables
    )
    domain = closed_form.domain()
    return AccelProblem(
        psi=bindings & Formula.of_atoms(domain),
        checked=Formula.true(),
        pending=loop.guard,
        loop=loop,
        closed_form=closed_form,
        exact=not domain,
    )


def _apply(technique: Technique, clause: Clause, problem: AccelProblem, solver: SMTClient,
           metering: Optional[PolyExp]) -> Optional[TechniqueResult]:
    chi = Formula([clause])
    if technique is Technique.MONOTONIC_INCREASE:
        return try_monotonic_increase(chi, problem.checked, problem.loop, solver)
    if technique is Technique.MONOTONIC_DECREASE:
        return try_monotonic_decrease(chi, problem.checked, problem.loop, problem.closed_form, solver)
    if technique is Technique.EVENTUAL_DECREASE:
        return try_eventual_decrease(clause, problem.checked, problem.loop, problem.closed_form, solver)
    if technique is Technique.EVENTUAL_INCREASE:
        return try_eventual_increase(clause, problem.checked, problem.loop, solver)
    return validate_metering(problem.loop, chi, problem.checked, metering, solver)


def _derive(problem: AccelProblem, techniques: List[Technique], solver: SMTClient,
            metering: Optional[PolyExp]) -> Tuple[AccelProblem, bool]:
    """
    Perform one derivation step.

    Techniques are tried in priority order, each on the pending clauses in
    input order; the first success is applied.

    Returns:
        Tuple of the (possibly only trace-extended) problem and whether a step was applied
    """
    for technique in techniques:
        for clause in problem.pending:
            mark = len(solver.history)
            outcome = _apply(technique, clause, problem, solver, metering)
            if outcome is None:
                continue

            accepted, note = True, None
            if technique is Technique.EVENTUAL_INCREASE:
                verdict = solver.check_sat(problem.psi & outcome.added)
                if verdict.is_unsat:
                    accepted, note = False, 'result is unsatisfiable'

            step = ProofStep(
                technique=technique,
                title=ACCELERATION_TITLES[technique],
                clause=clause,
                added=outcome.added,
                exact=outcome.exact,
                accepted=accepted,
                designated=outcome.designated,
                queries=tuple(solver.history[mark:]),
                note=note,
            )
            if not accepted:
                recorded = problem.record(step)
                if recorded is not problem:
                    logger.warning(f"Discarding {step}: {note}")
                problem = recorded
                continue

            logger.info(f"Applied {step}")
            return problem.advance(step), True
    return problem, False


def accelerate(loop: Loop, cfg: Optional[Config] = None, solver: Optional[SMTClient] = None) -> AccelResult:
    """
    Accelerate a loop with the conditional acceleration calculus.

    Args:
        loop: The loop to accelerate
        cfg: Run configuration (technique toggles, metering function, solver)
        solver: Solver client; built from cfg when omitted

    Returns:
        AccelResult; on failure leftover holds the clauses no technique handled
    """
    cfg = cfg or Config.from_settings()
    solver = solver or cfg.make_solver()
    started = time.monotonic()

    try:
        problem = canonical_problem(loop)
    except ClosedFormUnavailable as e:
        logger.info(f"No closed form: {e}")
        return AccelResult(
            loop=loop,
            formula=Formula.true(),
            exact=False,
            trace=(),
            leftover=loop.guard,
            reason=str(e),
        )

    techniques = [t for t in PRIORITIES if cfg.enabled(t.value)]
    metering = None
    if cfg.metering and cfg.enabled(Technique.METERING.value):
        metering = parse_polyexp(cfg.metering, loop.variables)
        techniques.append(Technique.METERING)

    progress = True
    while problem.pending and progress:
        problem, progress = _derive(problem, techniques, solver, metering)

    result = AccelResult.from_problem(problem)
    logger.info(
        f"Acceleration {'succeeded' if result.success else 'failed'} "
        f"(exact: {result.exact}) in {time.monotonic() - started:.2f}s"
    )
    return result
