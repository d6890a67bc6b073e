"""
The non-termination calculus: canonical problems and the derivation engine.
"""
import logging
import time
from typing import Dict, List, Optional, Tuple, Union

from accel.models import ProofStep, Technique, TechniqueResult
from expr.models import Clause, Formula, Var
from loopaccel.config import Config
from loops.models import Loop
from solver.models import SolverVerdict
from solver.services import SMTClient

from .models import NONTERM_TITLES, Certificate, NontermFailure, NontermProblem
from .techniques import nt_eventual_increase, nt_fixpoints, nt_monotonic_increase

logger = logging.getLogger(__name__)

PRIORITIES = (
    Technique.MONOTONIC_INCREASE,
    Technique.EVENTUAL_INCREASE,
    Technique.FIXPOINTS,
)

NontermOutcome = Union[Certificate, NontermFailure]


def canonical_problem(loop: Loop) -> NontermProblem:
    return NontermProblem(psi=Formula.true(), checked=Formula.true(), pending=loop.guard, loop=loop)


def _apply(technique: Technique, clause: Clause, problem: NontermProblem,
           solver: SMTClient) -> Optional[TechniqueResult]:
    if technique is Technique.MONOTONIC_INCREASE:
        return nt_monotonic_increase(Formula([clause]), problem.checked, problem.loop, solver)
    if technique is Technique.EVENTUAL_INCREASE:
        return nt_eventual_increase(clause, problem.checked, problem.loop, solver)
    return nt_fixpoints(clause, problem.checked, problem.loop, solver)


def _derive(problem: NontermProblem, techniques: List[Technique],
            solver: SMTClient) -> Tuple[NontermProblem, Optional[SolverVerdict]]:
    """
    Perform one derivation step.

    Every candidate step is followed by a satisfiability check of the extended
    psi; steps that are not known to be satisfiable are recorded as discarded.

    Returns:
        Tuple of the problem and the satisfiability verdict of the applied step (None if no step applied)
    """
    for technique in techniques:
        for clause in problem.pending:
            mark = len(solver.history)
            outcome = _apply(technique, clause, problem, solver)
            if outcome is None:
                continue

            verdict = solver.check_sat(problem.psi & outcome.added)
            note = None
            if verdict.is_unsat:
                note = 'result is unsatisfiable'
            elif verdict.is_unknown:
                note = f'satisfiability unknown ({verdict.reason})'

            step = ProofStep(
                technique=technique,
                title=NONTERM_TITLES[technique],
                clause=clause,
                added=outcome.added,
                exact=False,
                accepted=note is None,
                designated=outcome.designated,
                queries=tuple(solver.history[mark:]),
                note=note,
            )
            if note:
                recorded = problem.record(step)
                if recorded is not problem:
                    logger.warning(f"Discarding {step}: {note}")
                problem = recorded
                continue

            logger.info(f"Applied {step}")
            return problem.advance(step), verdict
    return problem, None


def _witness(loop: Loop, model: Dict[Var, int]) -> Dict[Var, int]:
    return {var: model.get(var, 0) for var in loop.variables}


def prove_nonterm(loop: Loop, cfg: Optional[Config] = None,
                  solver: Optional[SMTClient] = None) -> NontermOutcome:
    """
    Search a certificate of non-termination with the non-termination calculus.

    No closed form is needed. The witness is the solver's model of the final
    formula, with unconstrained variables set to 0.

    Returns:
        Certificate on success, NontermFailure otherwise
    """
    cfg = cfg or Config.from_settings()
    solver = solver or cfg.make_solver()
    started = time.monotonic()

    problem = canonical_problem(loop)
    techniques = [t for t in PRIORITIES if cfg.enabled(t.value)]

    verdict = solver.check_sat(problem.psi)
    while problem.pending:
        problem, applied = _derive(problem, techniques, solver)
        if applied is None:
            break
        verdict = applied

    elapsed = time.monotonic() - started
    if problem.pending or not verdict.is_sat:
        logger.info(f"No certificate found in {elapsed:.2f}s")
        return NontermFailure(
            loop=loop,
            formula=problem.psi,
            trace=problem.trace,
            leftover=problem.pending,
            reason='no technique applies to the remaining clauses',
        )

    witness = _witness(loop, verdict.model)
    logger.info(f"Certificate {problem.psi} with witness {witness} found in {elapsed:.2f}s")
    return Certificate(loop=loop, formula=problem.psi, witness=witness, trace=problem.trace)
