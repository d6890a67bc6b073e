"""
Tests for closed forms and poly-exponential summation.
"""
import itertools
import random

from django.test import SimpleTestCase

from expr.models import N, Atom, PolyExp, Var, variable
from loopaccel.exceptions import NonTriangular, UnsupportedRecurrence
from loopaccel.testing import corpus_loop
from loops.parser import parse_loop
from .services import solve_closed_form, sum_polyexp

X1, X2 = Var('x1'), Var('x2')
x1, x2, n = variable('x1'), variable('x2'), PolyExp.var(N)

# Corpus loops whose updates have closed forms
SOLVABLE = (
    't_exp', 't_inc', 't_nondec', 't_2invs', 't_2cinvs', 't_evdec', 't_evinc',
    't_phases_variant', 't_phases2_variant', 't_cubic',
)


def _direct_sum(q: PolyExp, base: int, steps: int) -> PolyExp:
    total = PolyExp()
    for k in range(steps):
        total = total + q.at_counter(k) * base ** k
    return total


class SolveClosedFormTestCase(SimpleTestCase):
    """Test closed forms of triangular updates."""

    def test_nondec(self):
        """Test a constant-increment update."""
        cf = solve_closed_form(corpus_loop('t_nondec'))
        self.assertEqual(cf[X1], x1 - n)
        self.assertEqual(cf[X2], x2 + n)

    def test_exp(self):
        """Test an exponential component."""
        cf = solve_closed_form(corpus_loop('t_exp'))
        self.assertEqual(cf[X1], x1 - n)
        self.assertEqual(cf[X2], x2 * PolyExp.exp(2))

    def test_evdec(self):
        """Test a quadratic component from a sum over a linear one."""
        cf = solve_closed_form(corpus_loop('t_evdec'))
        self.assertEqual(cf[X2], x2 - n)
        self.assertEqual(cf[X1], x1 + n * x2 - n * n / 2 + n / 2)

    def test_geometric_with_polynomial_input(self):
        """Test x := 2x + y with y incremented."""
        loop = parse_loop('vars: x, y;\nguard: x > 0;\nupdate: x := 2*x + y; y := y + 1;')
        cf = solve_closed_form(loop)
        for start, steps in itertools.product([(0, 0), (1, -2), (-3, 5)], range(6)):
            state = loop.state(start)
            expected = state
            for _ in range(steps):
                expected = loop.update.step(expected)
            self.assertEqual(cf.evaluate(state, steps), expected)

    def test_alternating_sign(self):
        """Test x := -x."""
        loop = parse_loop('vars: x;\nguard: x > 0;\nupdate: x := -x;')
        cf = solve_closed_form(loop)
        self.assertEqual(cf[Var('x')], variable('x') * PolyExp.exp(-1))

    def test_matches_interpreter(self):
        """Test closed forms against iteration on [-3, 3]^d for n in [0, 12]."""
        for name in SOLVABLE:
            loop = corpus_loop(name)
            cf = solve_closed_form(loop)
            mismatches = 0
            for values in itertools.product(range(-3, 4), repeat=loop.dimension):
                state = loop.state(values)
                current = state
                for steps in range(13):
                    if cf.evaluate(state, steps) != current:
                        mismatches += 1
                    current = loop.update.step(current)
            with self.subTest(name=name):
                self.assertEqual(mismatches, 0)

    def test_shifted(self):
        """Test the closed form one step before the end."""
        cf = solve_closed_form(corpus_loop('t_exp')).shifted(-1)
        self.assertEqual(cf[X1], x1 - n + 1)
        self.assertEqual(cf[X2], x2 * PolyExp.exp(2) / 2)

    def test_non_triangular(self):
        """Test that mutually dependent variables are rejected."""
        for name in ('t_nontriangular', 't_fixpoint'):
            with self.subTest(name=name):
                with self.assertRaises(NonTriangular) as ctx:
                    solve_closed_form(corpus_loop(name))
                self.assertEqual(ctx.exception.cycle, ('x1', 'x2'))

    def test_overwritten_variable(self):
        """Test that x1 := x2 is solved from n = 1 on."""
        cf = solve_closed_form(corpus_loop('t_evmon'))
        self.assertEqual(cf[X1], x2)
        self.assertEqual(cf[X2], x2)
        self.assertEqual(cf.valid_from, 1)
        self.assertEqual(cf.domain(), [])
        self.assertEqual(cf.shifted(-1).domain(), [Atom.gt0(n - 1)])

    def test_overwritten_chain(self):
        """Test that sums over an overwritten variable start one step late."""
        cf = solve_closed_form(corpus_loop('t_nonterm4'))
        x3, x4 = variable('x3'), variable('x4')
        self.assertEqual(cf.valid_from, 1)
        self.assertEqual(cf[X1], PolyExp.const(1))
        self.assertEqual(cf[X2], x2 + x1 + n - 1)
        self.assertEqual(cf[Var('x3')], x3 + x2 + (n - 1) * (x2 + x1) + (n - 1) * (n - 2) / 2)
        self.assertEqual(cf[Var('x4')], x4 * PolyExp.exp(-1))

    def test_overwritten_matches_interpreter(self):
        """Test closed forms with overwritten variables against iteration from valid_from on."""
        loops = [
            corpus_loop('t_evmon'),
            corpus_loop('t_nonterm4'),
            corpus_loop('t_nonlinear'),
            parse_loop('vars: x, y, z;\nguard: x > 0;\nupdate: x := y^2; y := y + 1; z := 2*z + x;'),
            parse_loop('vars: x, y;\nguard: x > 0;\nupdate: x := 3; y := x;'),
        ]
        for index, loop in enumerate(loops):
            cf = solve_closed_form(loop)
            for values in itertools.product(range(-2, 3), repeat=loop.dimension):
                state = loop.state(values)
                current = state
                for steps in range(10):
                    if steps >= cf.valid_from:
                        with self.subTest(loop=index, state=values, steps=steps):
                            self.assertEqual(cf.evaluate(state, steps), current)
                    current = loop.update.step(current)

    def test_self_nonlinear(self):
        """Test that x := x * x is outside the fragment."""
        loop = parse_loop('vars: x;\nguard: x > 0;\nupdate: x := x * x;')
        with self.assertRaises(UnsupportedRecurrence):
            solve_closed_form(loop)


class SumPolyExpTestCase(SimpleTestCase):
    """Test exact summation of polynomial times exponential summands."""

    def test_power_sum(self):
        """Test the sum of the first n naturals."""
        self.assertEqual(sum_polyexp(n, 1), n * n / 2 - n / 2)

    def test_symbolic_coefficients(self):
        """Test a summand whose coefficients mention program variables."""
        q = x1 * n + 1
        closed = sum_polyexp(q, 2)
        for steps in range(8):
            self.assertEqual(closed.at_counter(steps), _direct_sum(q, 2, steps))

    def test_random_summands(self):
        """Test 50 random summands of degree at most 4 with |base| at most 3."""
        rng = random.Random(20240601)
        bases = [b for b in range(-3, 4) if b]
        for _ in range(50):
            degree = rng.randint(0, 4)
            q = PolyExp()
            for power in range(degree + 1):
                q = q + rng.randint(-9, 9) * n ** power
            base = rng.choice(bases)
            closed = sum_polyexp(q, base)
            for steps in range(11):
                with self.subTest(q=str(q), base=base, steps=steps):
                    self.assertEqual(closed.at_counter(steps), _direct_sum(q, base, steps))

    def test_zero_base(self):
        """Test that base 0 is rejected."""
        with self.assertRaises(ValueError):
            sum_polyexp(n, 0)
