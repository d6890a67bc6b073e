"""
Ground truth by iteration: a loop interpreter, grid verification of
acceleration formulas and simulation of non-termination certificates.
"""
import itertools
import logging
from typing import Dict, Optional, Sequence

from accel.models import AccelResult
from expr.models import Atom, Clause, Formula, N, PolyExp, Var
from loopaccel.exceptions import WitnessRejected
from loops.models import Loop
from nonterm.models import Certificate
from solver.services import SMTClient

from .models import RunTrace, Violation, VerifyReport

logger = logging.getLogger(__name__)


def run_loop(loop: Loop, x0: Sequence[int], max_steps: int) -> RunTrace:
    """Iterate until the guard fails or max_steps iterations completed."""
    if max_steps < 0:
        raise ValueError('max_steps must be non-negative')
    state = loop.state(x0)
    states = [loop.vector(state)]
    iterations = 0
    while iterations < max_steps and loop.guard.holds(state):
        state = loop.update.step(state)
        states.append(loop.vector(state))
        iterations += 1
    return RunTrace(states=tuple(states), iterations=iterations)


def _environment(loop: Loop, start: Dict[Var, int], steps: int, end: Dict[Var, int]) -> Dict[Var, int]:
    env = dict(start)
    env[N] = steps
    env.update({var.primed: end[var] for var in loop.variables})
    return env


def verify_acceleration(loop: Loop, result: AccelResult, box: int, max_n: int) -> VerifyReport:
    """
    Check an acceleration formula on every start state in [-box, box]^d and every n in [1, max_n].

    The post-state is computed by iterating the update; a soundness violation is
    a model of the formula that is no valid n-step run, an exactness violation a
    valid run the formula rejects. Exactness violations are collected even when
    exactness is not claimed.
    """
    report = VerifyReport(
        kind='acceleration',
        bounds={'box': box, 'max_n': max_n},
        exact_claimed=result.exact,
    )
    for values in itertools.product(range(-box, box + 1), repeat=loop.dimension):
        start = loop.state(values)
        state, valid = start, True
        for steps in range(1, max_n + 1):
            valid = valid and loop.guard.holds(state)
            state = loop.update.step(state)
            claimed = result.formula.holds(_environment(loop, start, steps, state))
            report.checked += 1
            if claimed and not valid:
                report.soundness_violations.append(
                    Violation('soundness', tuple(values), steps, expected=False, got=True,
                              detail=f'end state {loop.vector(state)}')
                )
            elif valid and not claimed:
                report.exactness_violations.append(
                    Violation('exactness', tuple(values), steps, expected=True, got=False,
                              detail=f'end state {loop.vector(state)}')
                )

    logger.info(
        f"Checked {report.checked} runs: {len(report.soundness_violations)} soundness and "
        f"{len(report.exactness_violations)} exactness violations"
    )
    return report


def _blocking_clause(model: Dict[Var, int], variables: Sequence[Var]) -> Clause:
    """Some variable differs from the model."""
    atoms = []
    for var in variables:
        value = PolyExp.const(model[var])
        atoms.append(Atom.gt0(PolyExp.var(var) - value))
        atoms.append(Atom.gt0(value - PolyExp.var(var)))
    return Clause(atoms)


def _check_model(loop: Loop, cert: Certificate, model: Dict[Var, int], steps: int,
                 report: VerifyReport) -> Optional[RunTrace]:
    vector = loop.vector(model)
    trace = run_loop(loop, vector, steps)
    if trace.iterations < steps:
        report.soundness_violations.append(
            Violation('divergence', vector, trace.iterations, expected=True, got=False,
                      detail=f'guard failed at step {trace.iterations}')
        )
        return None
    successor = loop.update.step(model)
    if not cert.formula.holds(successor):
        report.soundness_violations.append(
            Violation('recurrence', vector, 1, expected=True, got=False,
                      detail=f'successor {loop.vector(successor)} leaves the certificate')
        )
    report.models_checked += 1
    return trace


def verify_certificate(loop: Loop, cert: Certificate, steps: int, solver: Optional[SMTClient] = None,
                       extra_models: int = 0) -> VerifyReport:
    """
    Simulate the witness and further models of a certificate.

    Besides the witness, up to extra_models distinct models are drawn from the
    solver with blocking clauses. Each model must keep the guard true for
    `steps` iterations and its successor must satisfy the certificate again.

    Raises:
        WitnessRejected: The witness itself violates the certificate or leaves the guard
    """
    report = VerifyReport(kind='certificate', bounds={'steps': steps, 'extra_models': extra_models})
    witness = {var: cert.witness.get(var, 0) for var in loop.variables}
    if not cert.formula.holds(witness):
        raise WitnessRejected(loop.vector(witness), 0)
    if _check_model(loop, cert, witness, steps, report) is None:
        failed = report.soundness_violations[-1]
        raise WitnessRejected(failed.state, failed.n)

    blocking_vars = sorted(cert.formula.variables(), key=loop.variables.index)
    query = cert.formula
    seen = witness
    for _ in range(extra_models if solver and blocking_vars else 0):
        query = query & Formula([_blocking_clause(seen, blocking_vars)])
        verdict = solver.check_sat(query)
        if not verdict.is_sat:
            logger.debug(f"Stopped sampling models: {verdict}")
            break
        seen = {var: verdict.model.get(var, 0) for var in loop.variables}
        _check_model(loop, cert, seen, steps, report)

    report.checked = report.models_checked
    report.simulated_steps = steps
    logger.info(f"Simulated {report.models_checked} models of {cert.formula} for {steps} steps")
    return report
