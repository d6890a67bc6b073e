"""
Tests for SMT-LIB2 printing, reply parsing and the solver client.
"""
import itertools
import subprocess
from unittest.mock import MagicMock, patch

from django.test import SimpleTestCase

from expr.models import Atom, Formula, N, PolyExp, Var, variable
from loopaccel.exceptions import ProtocolError, SolverUnavailable, UnsupportedTerm
from loopaccel.testing import requires_solver
from .models import QueryKind, VerdictStatus
from .services import SMTClient
from .smtlib import implication_script, parse_reply, symbol, term, to_smtlib

X, Y = Var('x'), Var('y')
x, y = variable('x'), variable('y')


def _reply(stdout: str) -> MagicMock:
    return MagicMock(stdout=stdout, stderr='', returncode=0)


class SmtlibTestCase(SimpleTestCase):
    """Test SMT-LIB2 printing and parsing."""

    def test_symbol_quoting(self):
        """Test that primed variables are quoted."""
        self.assertEqual(symbol(X), 'x')
        self.assertEqual(symbol(X.primed), "|x'|")

    def test_term(self):
        """Test printing polynomials with negative coefficients."""
        self.assertEqual(term(x - 3), '(+ x (- 3))')
        self.assertEqual(term(-2 * x * y), '(* (- 2) x y)')
        self.assertEqual(term(x ** 2), '(* x x)')

    def test_exponential_rejected(self):
        """Test that exponentials cannot be printed."""
        with self.assertRaises(UnsupportedTerm):
            term(PolyExp.exp(2))

    def test_rational_atom_scaled(self):
        """Test that atoms with rational coefficients are scaled to integers."""
        script = to_smtlib(Formula.of_atoms([Atom.gt0(x / 2 + 1)]))
        self.assertIn('(assert (> (+ x 2) 0))', script)

    def test_implication_script(self):
        """Test that the conclusion is negated."""
        script = implication_script(Formula.of_atoms([Atom.gt0(x)]), Formula.of_atoms([Atom.gt0(x + 1)]))
        self.assertIn('(declare-const x Int)', script)
        self.assertIn('(assert (> x 0))', script)
        self.assertIn('(assert (not (> (+ x 1) 0)))', script)
        self.assertTrue(script.rstrip().endswith('(get-model)'))

    def test_command_subset(self):
        """Test that scripts open with set-logic and use only the basic commands."""
        script = implication_script(Formula.of_atoms([Atom.gt0(x * y)]), Formula.of_atoms([Atom.gt0(x)]))
        lines = script.splitlines()

        self.assertEqual(lines[0], '(set-logic QF_NIA)')
        commands = {line.split()[0] for line in lines}
        self.assertEqual(commands, {'(set-logic', '(declare-const', '(assert', '(check-sat)', '(get-model)'})

    def test_parse_model(self):
        """Test reading a model with negative and quoted values."""
        status, model = parse_reply(
            "sat\n(\n  (define-fun x () Int\n    (- 4))\n  (define-fun |x'| () Int 7)\n)\n"
        )
        self.assertEqual(status, 'sat')
        self.assertEqual(model, {'x': -4, "x'": 7})

    def test_parse_unsat_with_model_error(self):
        """Test that the model error after unsat is ignored."""
        status, model = parse_reply('unsat\n(error "line 5 column 10: model is not available")\n')
        self.assertEqual(status, 'unsat')
        self.assertEqual(model, {})

    def test_parse_garbage(self):
        """Test that unexpected replies raise ProtocolError."""
        with self.assertRaises(ProtocolError):
            parse_reply('(error "unknown logic")\n')
        with self.assertRaises(ProtocolError):
            parse_reply('sat\n((define-fun x () Int 1)\n')


class SMTClientTestCase(SimpleTestCase):
    """Test the solver client against a patched process call."""

    def setUp(self):
        self.client = SMTClient(binary='z3', args=['-smt2', '-in'], timeout_ms=500)
        self.premise = Formula.of_atoms([Atom.gt0(x)])
        self.conclusion = Formula.of_atoms([Atom.gt0(x + 1)])

    @patch('solver.services.subprocess.run')
    def test_implication_proved(self, mock_run):
        """Test that unsat means the implication holds."""
        mock_run.return_value = _reply('unsat\n')

        verdict = self.client.check_implication(self.premise, self.conclusion)

        self.assertTrue(verdict.is_proved)
        args, kwargs = mock_run.call_args
        self.assertEqual(args[0], ['z3', '-smt2', '-in'])
        self.assertEqual(kwargs['timeout'], 0.5)
        self.assertIn('(check-sat)', kwargs['input'])

    @patch('solver.services.subprocess.run')
    def test_implication_countermodel(self, mock_run):
        """Test that a genuine countermodel is returned."""
        mock_run.return_value = _reply('sat\n((define-fun x () Int 0))\n')

        verdict = self.client.check_implication(
            Formula.of_atoms([Atom.gt0(x + 1)]), Formula.of_atoms([Atom.gt0(x)])
        )

        self.assertEqual(verdict.status, VerdictStatus.NOT_PROVED)
        self.assertEqual(verdict.model, {X: 0})

    @patch('solver.services.subprocess.run')
    def test_bogus_countermodel(self, mock_run):
        """Test that a model which does not refute the implication is treated as unknown."""
        mock_run.return_value = _reply('sat\n((define-fun x () Int 5))\n')

        verdict = self.client.check_implication(self.premise, self.conclusion)

        self.assertTrue(verdict.is_unknown)
        self.assertEqual(verdict.reason, 'incomplete')

    @patch('solver.services.subprocess.run')
    def test_timeout(self, mock_run):
        """Test that a timeout yields an unknown verdict."""
        mock_run.side_effect = subprocess.TimeoutExpired(cmd='z3', timeout=0.5)

        verdict = self.client.check_implication(self.premise, self.conclusion)

        self.assertTrue(verdict.is_unknown)
        self.assertEqual(verdict.reason, 'timeout')

    @patch('solver.services.subprocess.run')
    def test_solver_unknown(self, mock_run):
        """Test that the solver's own unknown is passed on."""
        mock_run.return_value = _reply('unknown\n')

        verdict = self.client.check_sat(self.premise)

        self.assertTrue(verdict.is_unknown)

    @patch('solver.services.subprocess.run')
    def test_missing_binary(self, mock_run):
        """Test that a missing executable raises SolverUnavailable."""
        mock_run.side_effect = FileNotFoundError('z3')

        with self.assertRaises(SolverUnavailable):
            self.client.check_sat(self.premise)

    @patch('solver.services.subprocess.run')
    def test_cache_and_history(self, mock_run):
        """Test that identical scripts are sent once and every query is recorded."""
        mock_run.return_value = _reply('unsat\n')

        self.client.check_implication(self.premise, self.conclusion)
        self.client.check_implication(self.premise, self.conclusion)

        self.assertEqual(mock_run.call_count, 1)
        self.assertEqual(len(self.client.history), 2)
        self.assertEqual(self.client.history[0].kind, QueryKind.IMPLICATION)

    @patch('solver.services.subprocess.run')
    def test_counter_formula_unsat_projection(self, mock_run):
        """Test that an unsat exponential-free projection decides formulas over n."""
        mock_run.return_value = _reply('unsat\n')
        formula = Formula.of_atoms([Atom.gt0(-PolyExp.var(N)), Atom.gt0(x * PolyExp.exp(2))])

        verdict = self.client.check_sat(formula)

        self.assertTrue(verdict.is_unsat)
        script = mock_run.call_args.kwargs['input']
        self.assertIn('(> n 0)', script)
        self.assertNotIn('2^n', script)

    @patch('solver.services.subprocess.run')
    def test_counter_formula_instantiated(self, mock_run):
        """Test that exponentials are handled by fixing n to small values."""
        mock_run.side_effect = [
            _reply('sat\n((define-fun n () Int 1))\n'),
            _reply('sat\n((define-fun x () Int 1))\n'),
        ]
        formula = Formula.of_atoms([Atom.gt0(PolyExp.var(N)), Atom.gt0(x * PolyExp.exp(2))])

        verdict = self.client.check_sat(formula)

        self.assertTrue(verdict.is_sat)
        self.assertEqual(verdict.model, {X: 1, N: 1})

    @patch('solver.services.subprocess.run')
    def test_replay(self, mock_run):
        """Test that replaying a recorded query reproduces its verdict."""
        mock_run.return_value = _reply('unsat\n')
        self.client.check_implication(self.premise, self.conclusion)

        replayed = self.client.fresh().replay(self.client.history[0])

        self.assertTrue(replayed.is_proved)
        self.assertEqual(mock_run.call_count, 2)


@requires_solver
class SMTClientIntegrationTestCase(SimpleTestCase):
    """Test the client against the installed solver."""

    def setUp(self):
        self.client = SMTClient()

    def test_implications(self):
        """Test a valid and an invalid implication."""
        self.assertTrue(self.client.check_implication(
            Formula.of_atoms([Atom.gt0(x)]), Formula.of_atoms([Atom.gt0(x + 1)])
        ).is_proved)
        verdict = self.client.check_implication(
            Formula.of_atoms([Atom.gt0(x)]), Formula.of_atoms([Atom.gt0(x - 1)])
        )
        self.assertTrue(verdict.is_sat)
        self.assertEqual(verdict.model[X], 1)

    def test_nonlinear_sat(self):
        """Test a satisfiable nonlinear formula and its model."""
        formula = Formula.of_atoms([Atom.gt0(x * x - 8), Atom.gt0(y - x)])
        verdict = self.client.check_sat(formula)
        self.assertTrue(verdict.is_sat)
        self.assertTrue(formula.holds(verdict.model))

    def test_nonlinear_implication(self):
        """Test the premise of eventual increase for x := (x1 + 1)^2; x1 := x1 + 1."""
        x1 = variable('x1')
        premise = Formula.of_atoms([Atom.geq0(x1), Atom.geq0((x1 + 1) ** 2 - x)])
        conclusion = Formula.of_atoms([Atom.geq0((x1 + 2) ** 2 - (x1 + 1) ** 2)])

        for values in itertools.product(range(-10, 11), repeat=2):
            env = {X: values[0], Var('x1'): values[1]}
            if premise.holds(env):
                self.assertTrue(conclusion.holds(env))
        self.assertTrue(self.client.check_implication(premise, conclusion).is_proved)

    def test_primed_variables(self):
        """Test quoting of primed variables end to end."""
        formula = Formula.of_atoms([Atom.eq0(PolyExp.var(X.primed) - x - 3), Atom.gt0(x)])
        verdict = self.client.check_sat(formula)
        self.assertTrue(verdict.is_sat)
        self.assertEqual(verdict.model[X.primed], verdict.model[X] + 3)
