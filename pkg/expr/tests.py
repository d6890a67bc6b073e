"""
Tests for the expression models and the conjunction simplifier.
"""
import random
from fractions import Fraction

from django.test import SimpleTestCase

from loopaccel.exceptions import NonIntegerResult, UnboundVariable, UnsupportedComposition
from .models import Atom, AtomKind, Clause, Formula, N, PolyExp, Var, variable
from .services import simplify_conjunction

X, Y = Var('x'), Var('y')
x, y, n = variable('x'), variable('y'), PolyExp.var(N)


class PolyExpTestCase(SimpleTestCase):
    """Test canonical forms and arithmetic."""

    def test_canonical_equality(self):
        """Test that equal expressions built differently compare equal."""
        self.assertEqual((x + 1) * (x - 1), x ** 2 - 1)
        self.assertEqual(x - x, 0)
        self.assertEqual(hash(2 * x + y), hash(y + x + x))

    def test_exponentials_fold(self):
        """Test that products of exponentials fold into one base."""
        self.assertEqual(PolyExp.exp(2) * PolyExp.exp(3), PolyExp.exp(6))
        self.assertTrue((PolyExp.exp(2) * x).has_exponential())
        self.assertFalse(PolyExp.exp(1).has_exponential())

    def test_rendering(self):
        """Test string rendering of polynomials and exponentials."""
        self.assertEqual(str(x + 1), 'x + 1')
        self.assertEqual(str(PolyExp.exp(2) * variable('x2') / 2), '1/2*2^n*x2')
        self.assertEqual(str(PolyExp.exp(-1)), '(-1)^n')
        self.assertEqual(str(PolyExp()), '0')

    def test_evaluate(self):
        """Test exact evaluation including the counter."""
        expr = x * PolyExp.exp(2) + n
        self.assertEqual(expr.evaluate({X: 3, N: 4}), 52)

    def test_evaluate_unbound(self):
        """Test that a missing variable is reported."""
        with self.assertRaises(UnboundVariable):
            (x + y).evaluate({X: 1})

    def test_evaluate_non_integer(self):
        """Test that fractional results are rejected by evaluate but not by value."""
        half = x / 2
        self.assertEqual(half.value({X: 3}), Fraction(3, 2))
        with self.assertRaises(NonIntegerResult):
            half.evaluate({X: 3})

    def test_shift_n(self):
        """Test shifting the counter under exponentials."""
        shifted = (x * PolyExp.exp(2)).shift_n(-1)
        self.assertEqual(shifted, x * PolyExp.exp(2) / 2)
        self.assertEqual((x - n).shift_n(-1), x - n + 1)

    def test_at_counter(self):
        """Test fixing the counter to a constant."""
        self.assertEqual((x * PolyExp.exp(2) + n).at_counter(3), 8 * x + 3)

    def test_unsupported_composition(self):
        """Test that n cannot be replaced by a non-shift under an exponential."""
        with self.assertRaises(UnsupportedComposition):
            PolyExp.exp(2).substitute({N: 2 * n})

    def test_simultaneous_substitution(self):
        """Test that substitution is simultaneous."""
        swapped = (x - y).substitute({X: y, Y: x})
        self.assertEqual(swapped, y - x)

    def test_content_and_sign(self):
        """Test content and leading sign helpers."""
        self.assertEqual((4 * x - 6).content(), 2)
        self.assertEqual((x / 2 + Fraction(1, 3)).denominator_lcm(), 6)
        self.assertEqual((-x + 1).leading_sign(), -1)

def _random_polyexp(rng: random.Random, terms: int = 4) -> PolyExp:
    """Random expression over x, y and n with up to two exponential bases besides 1."""
    result = PolyExp()
    for _ in range(rng.randint(0, terms)):
        mono = tuple((var, rng.randint(0, 2)) for var in (X, Y, N))
        base = rng.choice([1, 1, 2, -1, 3])
        coeff = Fraction(rng.randint(-6, 6), rng.choice([1, 1, 2, 3]))
        result = result + PolyExp({(mono, base): coeff})
    return result


def _random_env(rng: random.Random):
    return {X: rng.randint(-5, 5), Y: rng.randint(-5, 5), N: rng.randint(0, 6)}


class PolyExpInvariantTestCase(SimpleTestCase):
    """Test algebraic invariants of canonical forms on random expressions."""

    def setUp(self):
        self.rng = random.Random(20240917)
        self.exprs = [_random_polyexp(self.rng) for _ in range(40)]

    def test_canonical_form_idempotent(self):
        """Test that rebuilding an expression from its terms changes nothing."""
        for e in self.exprs:
            rebuilt = PolyExp({(mono, base): coeff for mono, base, coeff in e.terms()})
            with self.subTest(e=str(e)):
                self.assertEqual(rebuilt, e)
                self.assertEqual(str(rebuilt), str(e))
                self.assertEqual(rebuilt.terms(), e.terms())

    def test_equal_forms_agree(self):
        """Test that expressions built two ways are equal and agree on 200 random points."""
        for a, b, c in zip(self.exprs, self.exprs[1:], self.exprs[2:]):
            left, right = (a + b) * c, c * b + a * c
            self.assertEqual(left, right)
            for _ in range(200):
                env = _random_env(self.rng)
                self.assertEqual(left.value(env), right.value(env))

    def test_substitution_composes_with_evaluation(self):
        """Test that evaluating e[sigma] equals evaluating e at the evaluated images."""
        for e in self.exprs:
            sigma = {X: _random_polyexp(self.rng, 2), Y: _random_polyexp(self.rng, 2)}
            substituted = e.substitute(sigma)
            for _ in range(20):
                env = _random_env(self.rng)
                images = {X: sigma[X].value(env), Y: sigma[Y].value(env), N: env[N]}
                with self.subTest(e=str(e), env=env):
                    self.assertEqual(substituted.value(env), e.value(images))

    def test_shift_round_trip(self):
        """Test that shifting the counter by k and back is the identity."""
        for e in self.exprs:
            for k in range(-3, 4):
                with self.subTest(e=str(e), k=k):
                    self.assertEqual(e.shift_n(k).shift_n(-k), e)
                    env = _random_env(self.rng)
                    env[N] += 3
                    self.assertEqual(e.shift_n(k).value(env), e.value({**env, N: env[N] + k}))

    def test_ring_laws(self):
        """Test the commutative ring laws on canonical forms."""
        zero, one = PolyExp(), PolyExp.const(1)
        for a, b, c in zip(self.exprs, self.exprs[1:], self.exprs[2:]):
            with self.subTest(a=str(a), b=str(b), c=str(c)):
                self.assertEqual(a + b, b + a)
                self.assertEqual(a * b, b * a)
                self.assertEqual((a + b) + c, a + (b + c))
                self.assertEqual((a * b) * c, a * (b * c))
                self.assertEqual(a * (b + c), a * b + a * c)
                self.assertEqual(a + zero, a)
                self.assertEqual(a * one, a)
                self.assertEqual(a - a, zero)
                self.assertEqual(a * zero, zero)


class AtomTestCase(SimpleTestCase):
    """Test atoms and their normal forms."""

    def test_geq0_encoding(self):
        """Test that e >= 0 becomes e + 1 > 0 over the integers."""
        self.assertEqual(Atom.geq0(x), Atom.gt0(x + 1))
        self.assertEqual(Atom.geq0(x / 2), Atom.gt0(x + 1))

    def test_eq0_normalization(self):
        """Test that scaled and negated equations compare equal."""
        self.assertEqual(Atom.eq0(2 * x - 2 * y), Atom.eq0(y - x))
        self.assertEqual(Atom.eq0(2 * x).lhs, x)

    def test_holds(self):
        """Test atom evaluation."""
        self.assertTrue(Atom.gt0(x - 1).holds({X: 2}))
        self.assertFalse(Atom.gt0(x - 1).holds({X: 1}))
        self.assertTrue(Atom.eq0(x - y).holds({X: 5, Y: 5}))

    def test_constant_truth(self):
        """Test folding of constant atoms."""
        self.assertTrue(Atom.gt0(PolyExp.const(1)).constant_truth())
        self.assertFalse(Atom.gt0(PolyExp.const(0)).constant_truth())
        self.assertIsNone(Atom.gt0(x).constant_truth())

    def test_integral(self):
        """Test clearing denominators."""
        atom = Atom(AtomKind.GT0, x / 3 + Fraction(1, 2))
        self.assertEqual(atom.integral().lhs, 2 * x + 3)

    def test_primed_binding_rendering(self):
        """Test that post-state bindings render as assignments."""
        binding = Atom.eq0(PolyExp.var(X.primed) - (x + n))
        self.assertEqual(str(binding), "x' = n + x")


class FormulaTestCase(SimpleTestCase):
    """Test clauses and CNF formulas."""

    def test_set_semantics(self):
        """Test that clause and formula equality ignores order and duplicates."""
        a, b = Atom.gt0(x), Atom.gt0(y)
        self.assertEqual(Clause([a, b]), Clause([b, a, a]))
        self.assertEqual(Formula.of_atoms([a, b]), Formula.of_atoms([b, a]))

    def test_true_and_false(self):
        """Test the constant formulas."""
        self.assertTrue(Formula.true().holds({}))
        self.assertFalse(Formula.false().holds({}))
        self.assertEqual(str(Formula.true()), 'true')

    def test_without(self):
        """Test removing a clause keeps the remaining order."""
        clauses = [Clause([Atom.gt0(x)]), Clause([Atom.gt0(y)]), Clause([Atom.gt0(x + y)])]
        remaining = Formula(clauses).without(clauses[1])
        self.assertEqual(list(remaining), [clauses[0], clauses[2]])

    def test_disjunction_holds(self):
        """Test clause evaluation."""
        clause = Clause([Atom.gt0(x), Atom.gt0(y)])
        self.assertTrue(clause.holds({X: 0, Y: 1}))
        self.assertFalse(clause.holds({X: 0, Y: 0}))
        self.assertEqual(str(clause), '(x > 0 || y > 0)')

    def test_mentions_counter(self):
        """Test detection of the counter."""
        self.assertTrue(Formula.of_atoms([Atom.gt0(x - n)]).mentions_counter())
        self.assertTrue(Formula.of_atoms([Atom.gt0(PolyExp.exp(2))]).mentions_counter())
        self.assertFalse(Formula.of_atoms([Atom.gt0(x)]).mentions_counter())


class SimplifyConjunctionTestCase(SimpleTestCase):
    """Test the conjunction simplifier."""

    def test_ground_binding_substituted(self):
        """Test x4 + 1 > 0 together with x4 = -x4 simplifies to x4 = 0."""
        x4 = variable('x4')
        result = simplify_conjunction([Atom.gt0(x4 + 1), Atom.eq0(x4 - (-x4))])
        self.assertEqual(result, Formula.of_atoms([Atom.eq0(x4)]))

    def test_contradiction(self):
        """Test that a false constant atom yields false."""
        result = simplify_conjunction([Atom.gt0(x), Atom.eq0(x - (x + 1))])
        self.assertEqual(result, Formula.false())

    def test_conflicting_bindings(self):
        """Test that two different values for one variable yield false."""
        result = simplify_conjunction([Atom.eq0(x - 1), Atom.eq0(x - 2)])
        self.assertEqual(result, Formula.false())

    def test_non_integer_binding(self):
        """Test that 2x = 1 has no integer solution."""
        self.assertEqual(simplify_conjunction([Atom.eq0(2 * x - 1)]), Formula.false())

    def test_untouched_relational_atoms(self):
        """Test that equations over several variables are kept."""
        atoms = [Atom.gt0(x), Atom.eq0(x - y)]
        self.assertEqual(simplify_conjunction(atoms), Formula.of_atoms(atoms))
