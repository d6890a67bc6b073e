"""
Tests for the non-termination techniques and prover.
"""
from unittest.mock import MagicMock

from django.test import SimpleTestCase

from accel.models import Technique
from expr.models import Atom, Clause, Formula, PolyExp, Var, variable
from loopaccel.config import Config
from loopaccel.testing import corpus_loop, requires_solver
from loops.parser import parse_loop
from solver.models import SolverVerdict
from solver.services import SMTClient
from .models import Certificate, NontermFailure
from .services import prove_nonterm
from .techniques import nt_eventual_increase, nt_fixpoints, nt_monotonic_increase, var_closure

X, X1, X2 = Var('x'), Var('x1'), Var('x2')
x, x1, x2, x3, x4 = (variable(name) for name in ('x', 'x1', 'x2', 'x3', 'x4'))


class VarClosureTestCase(SimpleTestCase):
    """Test variable closures under the update."""

    def test_swap(self):
        """Test that x1 depends on x2 through the swap."""
        self.assertEqual(var_closure(corpus_loop('t_fixpoint'), x1), {X1, X2})

    def test_identity(self):
        """Test that an identity update adds nothing."""
        loop = parse_loop('vars: x1, x2;\nguard: x1 > 0;\nupdate: x2 := x2 + x1;')
        self.assertEqual(var_closure(loop, x1), {X1})

    def test_negation(self):
        """Test that x4 := -x4 only depends on x4."""
        self.assertEqual(var_closure(corpus_loop('t_nonterm4'), x4), {Var('x4')})

    def test_chain(self):
        """Test transitive dependencies."""
        self.assertEqual(var_closure(corpus_loop('t_nonterm4'), x3), {X1, X2, Var('x3')})


class FixpointTechniqueTestCase(SimpleTestCase):
    """Test the fixpoint technique against a stubbed solver."""

    def _solver(self, verdict):
        solver = MagicMock(spec=SMTClient)
        solver.check_sat.return_value = verdict
        return solver

    def test_swap_fixpoint(self):
        """Test that the swap loop is restricted to x1 = x2."""
        solver = self._solver(SolverVerdict.not_proved({X1: 1, X2: 1}))

        result = nt_fixpoints(Clause([Atom.gt0(x1)]), Formula.true(), corpus_loop('t_fixpoint'), solver)

        self.assertEqual(result.added, Formula.of_atoms([Atom.gt0(x1), Atom.eq0(x1 - x2)]))
        self.assertFalse(result.exact)

    def test_simplified_fixpoint(self):
        """Test that x4 + 1 > 0 with x4 = -x4 becomes x4 = 0."""
        solver = self._solver(SolverVerdict.not_proved({Var('x4'): 0}))
        loop = corpus_loop('t_nonterm4')

        result = nt_fixpoints(Clause([Atom.gt0(x4 + 1)]), Formula.true(), loop, solver)

        self.assertEqual(result.added, Formula.of_atoms([Atom.eq0(x4)]))

    def test_unsatisfiable_fixpoint(self):
        """Test that x := x + 1 has no fixpoint."""
        solver = self._solver(SolverVerdict.proved())
        loop = corpus_loop('t_inc')

        self.assertIsNone(nt_fixpoints(Clause([Atom.gt0(x)]), Formula.true(), loop, solver))
        self.assertEqual(solver.check_sat.call_args.args[0], Formula.false())


@requires_solver
class ProveNontermTestCase(SimpleTestCase):
    """Test certificates of the worked examples with the installed solver."""

    def setUp(self):
        self.cfg = Config.from_settings()

    def assertCertificate(self, name, atoms, techniques):
        loop = corpus_loop(name)
        outcome = prove_nonterm(loop, self.cfg)

        self.assertIsInstance(outcome, Certificate)
        self.assertEqual(outcome.formula, Formula.of_atoms(atoms))
        self.assertEqual([step.technique for step in outcome.trace if step.accepted], techniques)
        self.assertEqual(set(outcome.witness), set(loop.variables))
        self.assertTrue(outcome.formula.holds(outcome.witness))
        return outcome

    def test_inc(self):
        """Test the certificate x > 0."""
        self.assertCertificate('t_inc', [Atom.gt0(x)], [Technique.MONOTONIC_INCREASE])

    def test_eventual_increase(self):
        """Test the certificate x1 > 0 /\\ x2 >= 0."""
        self.assertCertificate('t_evinc', [Atom.gt0(x1), Atom.gt0(x2 + 1)], [Technique.EVENTUAL_INCREASE])

    def test_fixpoint(self):
        """Test the certificate x1 > 0 /\\ x1 = x2."""
        self.assertCertificate('t_fixpoint', [Atom.gt0(x1), Atom.eq0(x1 - x2)], [Technique.FIXPOINTS])

    def test_four_variables(self):
        """Test the derivation combining all three techniques."""
        self.assertCertificate(
            't_nonterm4',
            [Atom.gt0(x1), Atom.gt0(x3), Atom.gt0(x2 + 1), Atom.eq0(x4)],
            [Technique.MONOTONIC_INCREASE, Technique.EVENTUAL_INCREASE, Technique.FIXPOINTS],
        )

    def test_nonlinear(self):
        """Test the loop with a quadratic update."""
        self.assertCertificate(
            't_nonlinear',
            [Atom.gt0(x1 + 1), Atom.gt0(x - 9), Atom.gt0(x1 * x1 + 2 * x1 - x + 2)],
            [Technique.MONOTONIC_INCREASE, Technique.EVENTUAL_INCREASE],
        )

    def test_discarded_variable(self):
        """Test that loops without closed form can still be proved non-terminating."""
        outcome = prove_nonterm(corpus_loop('t_evmon'), self.cfg)
        self.assertTrue(outcome.proved)
        self.assertTrue(outcome.formula.holds(outcome.witness))

    def test_repeated_discard_logged_once(self):
        """Test that a clause rescanned after a fixpoint step keeps one discarded step."""
        loop = parse_loop('vars: x1, x2, x3;\nguard: x1 > 0 && x2 > 0;\nupdate: x1 := x1 - 1; x2 := x3; x3 := x2;')

        outcome = prove_nonterm(loop, self.cfg)

        self.assertFalse(outcome.proved)
        discarded = [step for step in outcome.trace if not step.accepted]
        self.assertEqual(len(discarded), 1)
        self.assertEqual(discarded[0].technique, Technique.EVENTUAL_INCREASE)
        self.assertEqual(discarded[0].clause, Clause([Atom.gt0(x1)]))
        self.assertEqual([step.technique for step in outcome.trace if step.accepted], [Technique.FIXPOINTS])

    def test_terminating_loops(self):
        """Test that terminating loops get no certificate."""
        for name in ('t_nondec', 't_exp', 't_evdec'):
            with self.subTest(name=name):
                outcome = prove_nonterm(corpus_loop(name), self.cfg)
                self.assertIsInstance(outcome, NontermFailure)
                self.assertFalse(outcome.proved)
                self.assertTrue(outcome.leftover)

    def test_true_guard(self):
        """Test that the empty guard yields the trivial certificate."""
        loop = parse_loop('vars: x;\nguard: true;\nupdate: x := x - 1;')
        outcome = prove_nonterm(loop, self.cfg)
        self.assertTrue(outcome.proved)
        self.assertTrue(outcome.formula.is_true)
        self.assertEqual(outcome.witness, {X: 0})

    def test_monotonic_increase_subsumed(self):
        """Test that disabling monotonic increase changes no verdict on the corpus."""
        without_mi = Config.from_settings(disabled=frozenset({'monotonic_increase'}))
        for name in ('t_inc', 't_evinc', 't_fixpoint', 't_nonterm4', 't_nonlinear', 't_nondec', 't_exp'):
            with self.subTest(name=name):
                loop = corpus_loop(name)
                self.assertEqual(
                    prove_nonterm(loop, self.cfg).proved,
                    prove_nonterm(loop, without_mi).proved,
                )

    def test_monotonic_increase_implies_eventual_increase(self):
        """Test that clauses accepted by monotonic increase are accepted by eventual increase."""
        solver = SMTClient()
        for name in ('t_inc', 't_nonterm4', 't_nonlinear', 't_nondec'):
            loop = corpus_loop(name)
            for clause in loop.guard:
                if nt_monotonic_increase(Formula([clause]), Formula.true(), loop, solver) is None:
                    continue
                with self.subTest(name=name, clause=str(clause)):
                    self.assertIsNotNone(nt_eventual_increase(clause, Formula.true(), loop, solver))
