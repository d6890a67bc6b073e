"""
Tests for the loop interpreter and the brute-force verification of results.
"""
from django.test import SimpleTestCase

from accel.models import AccelResult
from accel.services import accelerate, canonical_problem
from expr.models import Atom, Formula, Var, variable
from loopaccel.config import Config
from loopaccel.exceptions import WitnessRejected
from loopaccel.testing import corpus_loop, requires_solver
from nonterm.models import Certificate
from nonterm.services import prove_nonterm
from solver.services import SMTClient
from .services import run_loop, verify_acceleration, verify_certificate

X, X1, X2 = Var('x'), Var('x1'), Var('x2')
x, x1, x2 = variable('x'), variable('x1'), variable('x2')

ACCELERATED = (
    't_exp', 't_inc', 't_nondec', 't_2invs', 't_2cinvs', 't_evdec', 't_evinc',
    't_phases_variant', 't_phases2_variant', 't_evmon',
)
CERTIFIED = ('t_inc', 't_evinc', 't_fixpoint', 't_nonterm4', 't_nonlinear', 't_evmon')


class RunLoopTestCase(SimpleTestCase):
    """Test the loop interpreter."""

    def test_nondec(self):
        """Test a run that leaves the guard after three steps."""
        trace = run_loop(corpus_loop('t_nondec'), (3, 1), 100)
        self.assertEqual(trace.iterations, 3)
        self.assertEqual(trace.final, (0, 4))

    def test_guard_false_initially(self):
        """Test that no step is taken when the guard fails."""
        trace = run_loop(corpus_loop('t_inc'), (0,), 100)
        self.assertEqual(trace.iterations, 0)
        self.assertEqual(trace.states, ((0,),))

    def test_exp(self):
        """Test exact doubling."""
        trace = run_loop(corpus_loop('t_exp'), (2, 1), 100)
        self.assertEqual(trace.iterations, 2)
        self.assertEqual(trace.final, (0, 4))

    def test_step_bound(self):
        """Test that runs stop after max_steps iterations."""
        trace = run_loop(corpus_loop('t_inc'), (1,), 5)
        self.assertEqual(trace.iterations, 5)
        self.assertEqual(trace.final, (6,))

    def test_negative_bound(self):
        """Test that negative step bounds are rejected."""
        with self.assertRaises(ValueError):
            run_loop(corpus_loop('t_inc'), (1,), -1)


class VerifyAccelerationTestCase(SimpleTestCase):
    """Test grid verification of hand-built formulas."""

    def test_false_formula(self):
        """Test that the empty approximation is sound but misses runs."""
        loop = corpus_loop('t_nondec')
        result = AccelResult(loop, Formula.false(), exact=False, trace=(), leftover=Formula.true())

        report = verify_acceleration(loop, result, 2, 3)

        self.assertEqual(report.checked, 25 * 3)
        self.assertEqual(report.soundness_violations, [])
        self.assertTrue(report.exactness_violations)
        self.assertTrue(report.accepted)

    def test_unsound_formula(self):
        """Test that closed-form bindings alone are reported as unsound."""
        loop = corpus_loop('t_nondec')
        psi = canonical_problem(loop).psi
        result = AccelResult(loop, psi, exact=True, trace=(), leftover=Formula.true())

        report = verify_acceleration(loop, result, 2, 3)

        self.assertTrue(report.soundness_violations)
        self.assertEqual(report.exactness_violations, [])
        self.assertFalse(report.accepted)
        violation = report.soundness_violations[0]
        self.assertEqual(violation.kind, 'soundness')
        self.assertTrue(violation.got)


class VerifyCertificateTestCase(SimpleTestCase):
    """Test certificate simulation without solver sampling."""

    def test_witness_survives(self):
        """Test a witness of the eventually increasing loop."""
        loop = corpus_loop('t_evinc')
        cert = Certificate(loop, Formula.of_atoms([Atom.gt0(x1), Atom.gt0(x2 + 1)]), {X1: 1, X2: 0}, ())

        report = verify_certificate(loop, cert, 1000)

        self.assertTrue(report.accepted)
        self.assertEqual(report.models_checked, 1)
        self.assertEqual(report.simulated_steps, 1000)

    def test_witness_rejected(self):
        """Test that a terminating witness is a fatal error."""
        loop = corpus_loop('t_nondec')
        cert = Certificate(loop, Formula.of_atoms([Atom.gt0(x1), Atom.gt0(x2)]), {X1: 1, X2: 1}, ())

        with self.assertRaises(WitnessRejected) as ctx:
            verify_certificate(loop, cert, 1000)
        self.assertEqual(ctx.exception.step, 1)

    def test_witness_outside_formula(self):
        """Test that a witness must satisfy its certificate."""
        loop = corpus_loop('t_inc')
        cert = Certificate(loop, Formula.of_atoms([Atom.gt0(x - 5)]), {X: 1}, ())

        with self.assertRaises(WitnessRejected):
            verify_certificate(loop, cert, 10)

    def test_not_recurrent(self):
        """Test that a certificate left by a successor is reported."""
        loop = corpus_loop('t_inc')
        cert = Certificate(loop, Formula.of_atoms([Atom.gt0(x), Atom.gt0(5 - x)]), {X: 4}, ())

        report = verify_certificate(loop, cert, 100)

        self.assertFalse(report.accepted)
        self.assertEqual(report.soundness_violations[0].kind, 'recurrence')


@requires_solver
class OracleSweepTestCase(SimpleTestCase):
    """Test every corpus result against the oracle."""

    def setUp(self):
        self.cfg = Config.from_settings()

    def test_acceleration_sweep(self):
        """Test soundness everywhere and exactness where claimed on [-3, 3]^d, n in [1, 10]."""
        for name in ACCELERATED:
            loop = corpus_loop(name)
            result = accelerate(loop, self.cfg)
            report = verify_acceleration(loop, result, 3, 10)
            with self.subTest(name=name):
                self.assertTrue(result.success)
                self.assertEqual(report.soundness_violations, [])
                if result.exact:
                    self.assertEqual(report.exactness_violations, [])

    def test_eventual_increase_coverage(self):
        """Test that the eventual increase result misses exactly runs starting with x2 < 0."""
        loop = corpus_loop('t_evinc')
        report = verify_acceleration(loop, accelerate(loop, self.cfg), 3, 10)

        self.assertTrue(report.exactness_violations)
        self.assertTrue(all(violation.state[1] < 0 for violation in report.exactness_violations))

    def test_certificate_sweep(self):
        """Test that witnesses and five further models diverge and stay in the certificate."""
        for name in CERTIFIED:
            loop = corpus_loop(name)
            cert = prove_nonterm(loop, self.cfg)
            report = verify_certificate(loop, cert, 1000, SMTClient(), extra_models=5)
            with self.subTest(name=name):
                self.assertTrue(report.accepted, report.soundness_violations[:3])
                self.assertGreaterEqual(report.models_checked, 6)
