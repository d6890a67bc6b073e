"""
Tests for loop models, the loop parser and update application.
"""
import itertools

from django.test import SimpleTestCase

from expr.models import Atom, Clause, Formula, PolyExp, Var, variable
from loopaccel.exceptions import (
    DisallowedConstruct,
    LoopSyntaxError,
    NonPolynomialUpdate,
    UndeclaredVariable,
)
from loopaccel.testing import corpus_loop
from .models import Loop, Update
from .parser import parse_loop, parse_polyexp, render_loop
from .services import apply_update

X1, X2 = Var('x1'), Var('x2')
x1, x2 = variable('x1'), variable('x2')

NONDEC = """
vars: x1, x2;
guard: x1 > 0 && x2 > 0;
update: x1 := x1 - 1; x2 := x2 + 1;
"""


class ParseLoopTestCase(SimpleTestCase):
    """Test parsing of the loop input format."""

    def test_parse_simple_loop(self):
        """Test parsing variables, guard and update."""
        loop = parse_loop(NONDEC)

        self.assertEqual(loop.variables, (X1, X2))
        self.assertEqual(loop.guard, Formula.of_atoms([Atom.gt0(x1), Atom.gt0(x2)]))
        self.assertEqual(loop.update[X1], x1 - 1)
        self.assertEqual(loop.update[X2], x2 + 1)

    def test_relations_normalized(self):
        """Test that >=, < and <= become strict atoms over the integers."""
        loop = parse_loop('vars: x1, x2;\nguard: x1 >= 5 && x1 < x2 && x2 <= 7;\nupdate: x1 := x1;')
        expected = Formula.of_atoms([Atom.gt0(x1 - 4), Atom.gt0(x2 - x1), Atom.gt0(8 - x2)])
        self.assertEqual(loop.guard, expected)

    def test_equality_splits(self):
        """Test that == becomes two inequalities."""
        loop = parse_loop('vars: x1;\nguard: x1 == 3;\nupdate: x1 := x1;')
        self.assertEqual(loop.guard, Formula.of_atoms([Atom.gt0(x1 - 2), Atom.gt0(4 - x1)]))

    def test_disjunction(self):
        """Test clause groups with ||."""
        loop = parse_loop('vars: x1, x2;\nguard: (x1 > 0 || x2 > 0) && x1 + x2 > 0;\nupdate: x1 := x1;')
        self.assertEqual(len(loop.guard), 2)
        self.assertIn(Clause([Atom.gt0(x1), Atom.gt0(x2)]), loop.guard)

    def test_parenthesized_expression_in_guard(self):
        """Test that a parenthesized sum is not mistaken for a clause group."""
        loop = parse_loop('vars: x1, x2;\nguard: (x1 + x2) * 2 > 0;\nupdate: x1 := x1;')
        self.assertEqual(loop.guard, Formula.of_atoms([Atom.gt0(2 * x1 + 2 * x2)]))

    def test_true_guard_and_identity_default(self):
        """Test the empty guard and unassigned variables."""
        loop = parse_loop('vars: x1, x2;\nguard: true;\nupdate: x1 := x1 + 1;')
        self.assertTrue(loop.guard.is_true)
        self.assertEqual(loop.update[X2], x2)

    def test_comments_ignored(self):
        """Test that comments run to the end of the line."""
        loop = parse_loop('# header\nvars: x;   # one variable\nguard: x > 0;\nupdate: x := x + 1;')
        self.assertEqual(loop.dimension, 1)

    def test_syntax_error_position(self):
        """Test that syntax errors carry line and column."""
        with self.assertRaises(LoopSyntaxError) as ctx:
            parse_loop('vars: x1;\nguard x1 > 0;\nupdate: x1 := x1;')
        self.assertEqual(ctx.exception.line, 2)
        self.assertEqual(ctx.exception.col, 7)

    def test_undeclared_variable(self):
        """Test that unknown identifiers are rejected."""
        with self.assertRaises(UndeclaredVariable):
            parse_loop('vars: x1;\nguard: y > 0;\nupdate: x1 := x1;')

    def test_division_in_update(self):
        """Test that division is not polynomial."""
        with self.assertRaises(NonPolynomialUpdate):
            parse_loop('vars: x1;\nguard: x1 > 0;\nupdate: x1 := x1 / 2;')

    def test_variable_exponent(self):
        """Test that exponents must be constants."""
        with self.assertRaises(NonPolynomialUpdate):
            parse_loop('vars: x1, x2;\nguard: x1 > 0;\nupdate: x1 := x1 ^ x2;')

    def test_disallowed_guard_constructs(self):
        """Test negation, disequality and the reserved counter name."""
        for source in (
            'vars: x1;\nguard: x1 != 0;\nupdate: x1 := x1;',
            'vars: x1;\nguard: !(x1 > 0);\nupdate: x1 := x1;',
            'vars: n;\nguard: n > 0;\nupdate: n := n;',
            'vars: x1;\nguard: x1 % 2 > 0;\nupdate: x1 := x1;',
        ):
            with self.subTest(source=source):
                with self.assertRaises(DisallowedConstruct):
                    parse_loop(source)

    def test_parse_polyexp(self):
        """Test parsing a standalone expression."""
        self.assertEqual(parse_polyexp('x1 - x2 + 1', (X1, X2)), x1 - x2 + 1)
        with self.assertRaises(UndeclaredVariable):
            parse_polyexp('x3', (X1, X2))

    def test_render_round_trip(self):
        """Test that rendered corpus loops parse back to the same loop."""
        for name in ('t_nondec', 't_nonlinear', 't_nonterm4', 't_phases_variant'):
            with self.subTest(name=name):
                loop = corpus_loop(name)
                self.assertEqual(parse_loop(render_loop(loop)), loop)


class LoopModelTestCase(SimpleTestCase):
    """Test loop and update models."""

    def setUp(self):
        self.loop = parse_loop(NONDEC)

    def test_step(self):
        """Test one concrete update step."""
        state = self.loop.update.step(self.loop.state([3, 1]))
        self.assertEqual(self.loop.vector(state), (2, 2))

    def test_power(self):
        """Test symbolic update powers."""
        self.assertEqual(self.loop.update.power(3)[X1], x1 - 3)
        self.assertEqual(self.loop.update.power(0)[X2], x2)

    def test_invalid_loop(self):
        """Test that guards over undeclared variables are rejected."""
        with self.assertRaises(ValueError):
            Loop((X1,), Formula.of_atoms([Atom.gt0(x2)]), Update.from_mapping((X1,), {}))

    def test_non_integer_update_rejected(self):
        """Test that updates must have integer coefficients."""
        with self.assertRaises(ValueError):
            Loop((X1,), Formula.true(), Update.from_mapping((X1,), {X1: x1 / 2}))


class ApplyUpdateTestCase(SimpleTestCase):
    """Test update application on formulas and expressions."""

    def setUp(self):
        self.loop = parse_loop(NONDEC)

    def test_formula(self):
        """Test applying the update to the guard."""
        updated = apply_update(self.loop.guard, self.loop.update)
        self.assertEqual(updated, Formula.of_atoms([Atom.gt0(x1 - 1), Atom.gt0(x2 + 1)]))

    def test_expression_power(self):
        """Test applying the update twice to an expression."""
        self.assertEqual(apply_update(x1 + x2, self.loop.update, 2), x1 + x2)
        self.assertEqual(apply_update(x1 * PolyExp.const(2), self.loop.update, 2), 2 * x1 - 4)

    def test_zero_applications(self):
        """Test that k = 0 returns the target unchanged."""
        self.assertIs(apply_update(self.loop.guard, self.loop.update, 0), self.loop.guard)

    def test_eventual_increase_two_steps(self):
        """Test x1 after two steps of x1 := x1 + x2; x2 := x2 + 1."""
        self.assertEqual(apply_update(x1, corpus_loop('t_evinc').update, 2), x1 + 2 * x2 + 1)

    def test_composition(self):
        """Test that k then j applications equal k + j applications and match stepping on a grid."""
        for name in ('t_evinc', 't_exp', 't_nonterm4'):
            loop = corpus_loop(name)
            target = sum((PolyExp.var(var) * (i + 1) for i, var in enumerate(loop.variables)), PolyExp())
            for k, j in itertools.product(range(4), repeat=2):
                with self.subTest(name=name, k=k, j=j):
                    composed = apply_update(apply_update(target, loop.update, k), loop.update, j)
                    self.assertEqual(composed, apply_update(target, loop.update, k + j))
                    self.assertEqual(
                        apply_update(apply_update(loop.guard, loop.update, k), loop.update, j),
                        apply_update(loop.guard, loop.update, k + j),
                    )
            for values in itertools.product(range(-2, 3), repeat=loop.dimension):
                state = loop.state(values)
                current = state
                for k in range(5):
                    with self.subTest(name=name, state=values, k=k):
                        self.assertEqual(apply_update(target, loop.update, k).evaluate(state), target.evaluate(current))
                        self.assertEqual(apply_update(loop.guard, loop.update, k).holds(state), loop.guard.holds(current))
                    current = loop.update.step(current)
