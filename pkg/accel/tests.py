"""
Tests for the acceleration techniques and the acceleration engine.
"""
from dataclasses import replace
from unittest.mock import MagicMock

from django.test import SimpleTestCase

from closedform.services import solve_closed_form
from expr.models import Atom, Clause, Formula, N, PolyExp, Var, variable
from loopaccel.config import Config
from loopaccel.exceptions import ClosedFormUnavailable
from loopaccel.testing import corpus_loop, requires_solver
from loops.parser import parse_loop
from solver.models import SolverVerdict
from solver.services import SMTClient
from .models import ACCELERATION_TITLES, ProofStep, Technique
from .services import accelerate, canonical_problem
from .techniques import (
    try_eventual_decrease,
    try_eventual_increase,
    try_monotonic_decrease,
    try_monotonic_increase,
    validate_metering,
)

X1, X2, X3 = Var('x1'), Var('x2'), Var('x3')
x1, x2, x3, n = variable('x1'), variable('x2'), variable('x3'), PolyExp.var(N)


def _bindings(loop):
    cf = solve_closed_form(loop)
    return [Atom.eq0(PolyExp.var(var.primed) - cf[var]) for var in loop.variables]


def _before_last(loop, var):
    return solve_closed_form(loop).shifted(-1)[var]


def _solver(verdict):
    solver = MagicMock(spec=SMTClient)
    solver.check_implication.return_value = verdict
    return solver


class TechniqueTestCase(SimpleTestCase):
    """Test single techniques against a stubbed solver."""

    def setUp(self):
        self.loop = corpus_loop('t_nondec')
        self.cf = solve_closed_form(self.loop)
        self.chi = Formula.of_atoms([Atom.gt0(x1)])

    def test_monotonic_increase_premise(self):
        """Test that monotonic increase asks checked /\\ chi ==> chi(a(x))."""
        solver = _solver(SolverVerdict.proved())
        checked = Formula.of_atoms([Atom.gt0(x2)])

        result = try_monotonic_increase(self.chi, checked, self.loop, solver)

        self.assertEqual(result.added, self.chi)
        self.assertTrue(result.exact)
        premise, conclusion = solver.check_implication.call_args.args
        self.assertEqual(premise, Formula.of_atoms([Atom.gt0(x2), Atom.gt0(x1)]))
        self.assertEqual(conclusion, Formula.of_atoms([Atom.gt0(x1 - 1)]))

    def test_monotonic_decrease_result(self):
        """Test that monotonic decrease evaluates chi one step before the end."""
        solver = _solver(SolverVerdict.proved())

        result = try_monotonic_decrease(self.chi, Formula.true(), self.loop, self.cf, solver)

        self.assertEqual(result.added, Formula.of_atoms([Atom.gt0(x1 - n + 1)]))
        self.assertTrue(result.exact)

    def test_not_proved_and_unknown(self):
        """Test that refuted and unknown premises both mean not applicable."""
        for verdict in (SolverVerdict.not_proved({X1: 0}), SolverVerdict.unknown('timeout')):
            with self.subTest(verdict=str(verdict)):
                solver = _solver(verdict)
                self.assertIsNone(try_monotonic_increase(self.chi, Formula.true(), self.loop, solver))
                self.assertIsNone(try_eventual_increase(Clause([Atom.gt0(x1)]), Formula.true(), self.loop, solver))

    def test_eventual_decrease_on_disjunction(self):
        """Test that eventual decrease on a proper clause uses the first atom and is not exact."""
        solver = _solver(SolverVerdict.proved())
        clause = Clause([Atom.gt0(x1), Atom.gt0(x2)])

        result = try_eventual_decrease(clause, Formula.true(), self.loop, self.cf, solver)

        self.assertFalse(result.exact)
        self.assertEqual(result.designated, Atom.gt0(x1))
        self.assertEqual(result.added, Formula.of_atoms([Atom.gt0(x1), Atom.gt0(x1 - n + 1)]))

    def test_late_closed_form_restricts_counter(self):
        """Test that a closed form valid from n = 1 on restricts results through x(n - 1) to n > 1."""
        loop = corpus_loop('t_evmon')
        cf = solve_closed_form(loop)
        solver = _solver(SolverVerdict.proved())

        decrease = try_monotonic_decrease(self.chi, Formula.true(), loop, cf, solver)
        self.assertEqual(decrease.added, Formula.of_atoms([Atom.gt0(x2), Atom.gt0(n - 1)]))
        self.assertFalse(decrease.exact)

        eventual = try_eventual_decrease(Clause([Atom.gt0(x1)]), Formula.true(), loop, cf, solver)
        self.assertEqual(eventual.added, Formula.of_atoms([Atom.gt0(x1), Atom.gt0(x2), Atom.gt0(n - 1)]))
        self.assertFalse(eventual.exact)

    def test_eventual_increase_result(self):
        """Test the recurrent-style result 0 < e(x) <= e(a(x))."""
        loop = corpus_loop('t_evinc')
        solver = _solver(SolverVerdict.proved())

        result = try_eventual_increase(Clause([Atom.gt0(x1)]), Formula.true(), loop, solver)

        self.assertEqual(result.added, Formula.of_atoms([Atom.gt0(x1), Atom.gt0(x2 + 1)]))
        self.assertFalse(result.exact)

    def test_metering_bound(self):
        """Test the iteration bound of a validated metering function."""
        solver = _solver(SolverVerdict.proved())

        result = validate_metering(self.loop, self.chi, Formula.true(), x1, solver)

        self.assertEqual(result.added, Formula.of_atoms([Atom.gt0(x1 - n + 1)]))
        self.assertFalse(result.exact)
        self.assertEqual(solver.check_implication.call_count, 2)


class CanonicalProblemTestCase(SimpleTestCase):
    """Test canonical acceleration problems."""

    def test_bindings(self):
        """Test that psi binds post-states to the closed form."""
        loop = corpus_loop('t_nondec')
        problem = canonical_problem(loop)

        self.assertEqual(problem.psi, Formula.of_atoms(_bindings(loop)))
        self.assertEqual(problem.pending, loop.guard)
        self.assertTrue(problem.checked.is_true)
        self.assertTrue(problem.exact)

    def test_late_closed_form(self):
        """Test that a closed form valid from n = 2 on restricts psi and drops exactness."""
        loop = parse_loop('vars: x, y;\nguard: y > 0;\nupdate: x := 3; y := x;')
        problem = canonical_problem(loop)

        self.assertIn(Atom.gt0(n - 1), list(problem.psi.atoms()))
        self.assertFalse(problem.exact)

    def test_discarded_step_recorded_once(self):
        """Test that rediscovering a discarded step does not grow the trace."""
        problem = canonical_problem(corpus_loop('t_exp'))
        clause = problem.pending.clauses[0]
        step = ProofStep(
            technique=Technique.EVENTUAL_INCREASE,
            title=ACCELERATION_TITLES[Technique.EVENTUAL_INCREASE],
            clause=clause,
            added=Formula.of_atoms([Atom.gt0(x1)]),
            exact=False,
            accepted=False,
            note='result is unsatisfiable',
        )

        once = problem.record(step)
        twice = once.record(replace(step, queries=()))

        self.assertEqual(len(once.trace), 1)
        self.assertEqual(twice.trace, once.trace)
        self.assertEqual(len(once.record(replace(step, technique=Technique.METERING)).trace), 2)

    def test_no_closed_form(self):
        """Test that non-triangular updates have no canonical problem."""
        with self.assertRaises(ClosedFormUnavailable):
            canonical_problem(corpus_loop('t_nontriangular'))

    def test_failed_result_without_solver_calls(self):
        """Test that acceleration fails gracefully without a closed form."""
        loop = corpus_loop('t_nontriangular')
        solver = MagicMock(spec=SMTClient)

        result = accelerate(loop, Config.from_settings(), solver)

        self.assertFalse(result.success)
        self.assertEqual(result.leftover, loop.guard)
        self.assertIn('not triangular', result.reason)
        solver.check_implication.assert_not_called()


@requires_solver
class AccelerateTestCase(SimpleTestCase):
    """Test the worked derivations end to end with the installed solver."""

    def setUp(self):
        self.cfg = Config.from_settings()

    def assertDerivation(self, name, extra_atoms, techniques, exact=True):
        loop = corpus_loop(name)
        result = accelerate(loop, self.cfg)

        self.assertTrue(result.success, result.reason)
        self.assertEqual(result.formula, Formula.of_atoms(_bindings(loop) + extra_atoms))
        self.assertEqual([step.technique for step in result.accepted_steps], techniques)
        self.assertEqual(result.exact, exact)
        return result

    def test_exp(self):
        """Test acceleration of the loop with an exponential variable."""
        self.assertDerivation('t_exp', [Atom.gt0(x1 - n + 1)], [Technique.MONOTONIC_DECREASE])

    def test_nondec(self):
        """Test monotonic increase on x2 > 0 followed by monotonic decrease on x1 > 0."""
        self.assertDerivation(
            't_nondec',
            [Atom.gt0(x2), Atom.gt0(x1 - n + 1)],
            [Technique.MONOTONIC_INCREASE, Technique.MONOTONIC_DECREASE],
        )

    def test_two_invariants(self):
        """Test that the converse invariant x2 > 0 is processed before the invariant x1 > 0."""
        self.assertDerivation(
            't_2invs',
            [Atom.gt0(x2 - n + 1), Atom.gt0(x1)],
            [Technique.MONOTONIC_DECREASE, Technique.MONOTONIC_INCREASE],
        )

    def test_two_converse_invariants(self):
        """Test the three-step derivation with two converse invariants."""
        loop = corpus_loop('t_2cinvs')
        self.assertDerivation(
            't_2cinvs',
            [Atom.gt0(x1 - n + 1), Atom.gt0(x2), Atom.gt0(_before_last(loop, X3))],
            [Technique.MONOTONIC_DECREASE, Technique.MONOTONIC_INCREASE, Technique.MONOTONIC_DECREASE],
        )

    def test_eventual_decrease(self):
        """Test exact acceleration via eventual decrease."""
        loop = corpus_loop('t_evdec')
        self.assertDerivation(
            't_evdec',
            [Atom.gt0(x1), Atom.gt0(_before_last(loop, X1))],
            [Technique.EVENTUAL_DECREASE],
        )

    def test_phases_variant(self):
        """Test eventual decrease assuming the already processed x3 > 0."""
        loop = corpus_loop('t_phases_variant')
        self.assertDerivation(
            't_phases_variant',
            [Atom.gt0(x3), Atom.gt0(x1), Atom.gt0(_before_last(loop, X1))],
            [Technique.MONOTONIC_INCREASE, Technique.EVENTUAL_DECREASE],
        )

    def test_eventual_increase(self):
        """Test the approximating acceleration of the eventually increasing loop."""
        self.assertDerivation(
            't_evinc',
            [Atom.gt0(x1), Atom.gt0(x2 + 1)],
            [Technique.EVENTUAL_INCREASE],
            exact=False,
        )

    def test_phases2_variant(self):
        """Test eventual increase assuming x3 > 0."""
        self.assertDerivation(
            't_phases2_variant',
            [Atom.gt0(x3), Atom.gt0(x1), Atom.gt0(x2 + 1)],
            [Technique.MONOTONIC_INCREASE, Technique.EVENTUAL_INCREASE],
            exact=False,
        )

    def test_inc(self):
        """Test the trivially invariant guard."""
        self.assertDerivation('t_inc', [Atom.gt0(variable('x'))], [Technique.MONOTONIC_INCREASE])

    def test_overwritten_variable(self):
        """Test eventual decrease on x1 > 0 when x1 := x2, restricted to n > 1."""
        self.assertDerivation(
            't_evmon',
            [Atom.gt0(x1), Atom.gt0(x2), Atom.gt0(n - 1)],
            [Technique.EVENTUAL_DECREASE],
            exact=False,
        )

    def test_repeated_discard_logged_once(self):
        """Test that clauses rescanned after a later success keep one discarded step each."""
        loop = parse_loop('vars: x1, x2;\nguard: x1 > 0 && x2 > 0;\nupdate: x1 := x1 - 1; x2 := x2 - 1;')
        cfg = Config.from_settings(
            metering='x1',
            disabled=frozenset({'monotonic_decrease', 'eventual_decrease'}),
        )

        result = accelerate(loop, cfg)

        self.assertFalse(result.success)
        discarded = [step for step in result.trace if not step.accepted]
        self.assertEqual([step.technique for step in discarded], [Technique.EVENTUAL_INCREASE] * 2)
        self.assertEqual(len({step.clause for step in discarded}), 2)
        self.assertEqual([step.technique for step in result.accepted_steps], [Technique.METERING])

    def test_cubic_fails(self):
        """Test that no technique handles the cubic guard."""
        loop = corpus_loop('t_cubic')
        result = accelerate(loop, self.cfg)

        self.assertFalse(result.success)
        self.assertEqual(result.leftover, loop.guard)
        self.assertFalse(result.exact)

    def test_non_triangular_fails(self):
        """Test that a non-triangular update is reported, not raised."""
        result = accelerate(corpus_loop('t_nontriangular'), self.cfg)

        self.assertFalse(result.success)
        self.assertIn('not triangular', result.reason)

    def test_empty_eventual_increase_discarded(self):
        """Test that an unsatisfiable eventual increase result is discarded."""
        loop = corpus_loop('t_exp')
        solver = SMTClient()

        outcome = try_eventual_increase(Clause([Atom.gt0(x1)]), Formula.true(), loop, solver)
        self.assertTrue(solver.check_sat(outcome.added).is_unsat)

        cfg = Config.from_settings(disabled=frozenset({'monotonic_decrease', 'eventual_decrease'}))
        result = accelerate(loop, cfg)
        self.assertFalse(result.success)
        self.assertEqual(len(result.trace), 1)
        self.assertFalse(result.trace[0].accepted)
        self.assertEqual(result.trace[0].technique, Technique.EVENTUAL_INCREASE)

    def test_only_monotonic_steps(self):
        """Test that loops with invariant and converse invariant guards need only monotonic steps."""
        monotonic = {Technique.MONOTONIC_INCREASE, Technique.MONOTONIC_DECREASE}
        cfg = Config.from_settings(disabled=frozenset({'eventual_decrease', 'eventual_increase'}))
        for name in ('t_nondec', 't_2invs'):
            with self.subTest(name=name):
                result = accelerate(corpus_loop(name), cfg)
                self.assertTrue(result.success)
                self.assertTrue(result.exact)
                self.assertTrue({step.technique for step in result.trace} <= monotonic)

    def test_metering_function(self):
        """Test acceleration with a user supplied metering function."""
        cfg = Config.from_settings(
            metering='x1',
            disabled=frozenset({'monotonic_decrease', 'eventual_decrease', 'eventual_increase'}),
        )
        loop = corpus_loop('t_nondec')

        result = accelerate(loop, cfg)

        self.assertTrue(result.success)
        self.assertFalse(result.exact)
        self.assertEqual(
            [step.technique for step in result.accepted_steps],
            [Technique.MONOTONIC_INCREASE, Technique.METERING],
        )
        self.assertEqual(result.formula, Formula.of_atoms(_bindings(loop) + [Atom.gt0(x2), Atom.gt0(x1 - n + 1)]))

    def test_replay(self):
        """Test that recorded queries reproduce their verdicts."""
        result = accelerate(corpus_loop('t_2invs'), self.cfg)
        client = SMTClient(use_cache=False)
        self.assertTrue(all(step.replay(client) for step in result.trace))
