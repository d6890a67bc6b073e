"""
Client for an external SMT-LIB2 solver process.
"""
import logging
import subprocess
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from django.conf import settings

from expr.models import Atom, Formula, N, PolyExp, Var
from loopaccel.exceptions import ProtocolError, SolverUnavailable

from .models import QueryKind, SolverQuery, SolverVerdict
from .smtlib import implication_script, parse_reply, to_smtlib

logger = logging.getLogger(__name__)

COUNTER_INSTANCES = (1, 2, 3)


class SMTClient:
    """
    Implication and satisfiability checks via a solver binary speaking SMT-LIB2 on stdin.

    One client serves one worker; it keeps a history of answered queries for
    proof traces and caches replies per script.
    """

    def __init__(self, binary: Optional[str] = None, args: Optional[Sequence[str]] = None,
                 timeout_ms: Optional[int] = None, use_cache: bool = True):
        self.binary = binary or settings.LOOPACCEL_SMT_BIN
        self.args = list(settings.LOOPACCEL_SMT_ARGS if args is None else args)
        self.timeout_ms = timeout_ms or settings.LOOPACCEL_TIMEOUT_MS
        self.use_cache = use_cache
        self.history: List[SolverQuery] = []
        self._cache: Dict[str, Tuple[str, Dict[str, int]]] = {}

    def fresh(self) -> 'SMTClient':
        """A client with the same solver configuration and no cache."""
        return SMTClient(self.binary, self.args, self.timeout_ms, use_cache=False)

    def run_script(self, script: str) -> Tuple[str, Dict[str, int]]:
        """
        Run one script through the solver.

        Returns:
            Tuple of status ('sat', 'unsat', 'unknown' or 'timeout') and the raw model
        """
        if self.use_cache and script in self._cache:
            return self._cache[script]

        logger.debug(f"SMT query:\n{script}")
        try:
            completed = subprocess.run(
                [self.binary, *self.args],
                input=script,
                capture_output=True,
                text=True,
                timeout=self.timeout_ms / 1000,
            )
        except subprocess.TimeoutExpired:
            logger.warning(f"Solver timed out after {self.timeout_ms} ms")
            return 'timeout', {}
        except OSError as e:
            logger.error(f"Cannot start solver {self.binary}: {e}")
            raise SolverUnavailable(f'cannot run solver {self.binary!r}: {e}') from e

        try:
            reply = parse_reply(completed.stdout)
        except ProtocolError:
            logger.error(f"Malformed solver reply (exit {completed.returncode}): {completed.stderr.strip()}")
            raise

        if self.use_cache:
            self._cache[script] = reply
        return reply

    @staticmethod
    def _model(raw: Mapping[str, int], variables) -> Dict[Var, int]:
        return {var: raw.get(var.name, 0) for var in variables}

    def _record(self, kind: QueryKind, premise: Formula, conclusion: Optional[Formula],
                verdict: SolverVerdict) -> SolverVerdict:
        self.history.append(SolverQuery(kind, premise, conclusion, verdict))
        return verdict

    def check_implication(self, premise: Formula, conclusion: Formula) -> SolverVerdict:
        """
        Decide premise ==> conclusion over the integers.

        Unknown verdicts must be treated as "not applicable" by callers.
        """
        status, raw = self.run_script(implication_script(premise, conclusion))
        if status == 'unsat':
            verdict = SolverVerdict.proved()
        elif status == 'sat':
            model = self._model(raw, premise.variables() | conclusion.variables())
            if premise.holds(model) and not conclusion.holds(model):
                verdict = SolverVerdict.not_proved(model)
            else:
                logger.warning(f"Countermodel {model} does not refute {premise} ==> {conclusion}")
                verdict = SolverVerdict.unknown('incomplete')
        else:
            verdict = SolverVerdict.unknown('timeout' if status == 'timeout' else 'incomplete')
        return self._record(QueryKind.IMPLICATION, premise, conclusion, verdict)

    def _check_sat_plain(self, formula: Formula) -> SolverVerdict:
        status, raw = self.run_script(to_smtlib(formula))
        if status == 'unsat':
            return SolverVerdict.proved()
        if status == 'sat':
            model = self._model(raw, formula.variables())
            if formula.holds(model):
                return SolverVerdict.not_proved(model)
            logger.warning(f"Model {model} does not satisfy {formula}")
            return SolverVerdict.unknown('incomplete')
        return SolverVerdict.unknown('timeout' if status == 'timeout' else 'incomplete')

    def _check_sat_counter(self, formula: Formula) -> SolverVerdict:
        """
        Satisfiability for formulas over the counter n (n > 0 is implied).

        The exponential-free projection decides unsatisfiability; models are
        searched by fixing n to small values.
        """
        projection = Formula(c for c in formula if not c.has_exponential())
        projection = projection & Formula.of_atoms([Atom.gt0(PolyExp.var(N))])
        verdict = self._check_sat_plain(projection)
        if verdict.is_unsat or not formula.has_exponential():
            return verdict

        for steps in COUNTER_INSTANCES:
            instance = formula.substitute({N: PolyExp.const(steps)})
            candidate = self._check_sat_plain(instance)
            if candidate.is_sat:
                model = dict(candidate.model)
                model[N] = steps
                return SolverVerdict.not_proved(model)
        return SolverVerdict.unknown('incomplete')

    def check_sat(self, formula: Formula) -> SolverVerdict:
        """Satisfiability check; NOT_PROVED carries a model, PROVED means unsat."""
        if formula.mentions_counter():
            verdict = self._check_sat_counter(formula)
        else:
            verdict = self._check_sat_plain(formula)
        if verdict.is_unknown:
            logger.warning(f"Satisfiability of {formula} unknown ({verdict.reason})")
        return self._record(QueryKind.SAT, formula, None, verdict)

    def replay(self, query: SolverQuery) -> SolverVerdict:
        if query.kind is QueryKind.IMPLICATION:
            return self.check_implication(query.premise, query.conclusion)
        return self.check_sat(query.premise)
