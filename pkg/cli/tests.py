"""
Tests for the accelerate, nonterm and both commands and their renderings.
"""
import io
import json
import os
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path
from unittest.mock import patch

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from accel.models import ACCELERATION_TITLES, AccelResult, ProofStep, Technique
from accel.services import canonical_problem
from expr.models import Atom, Formula, Var, variable
from loopaccel.config import Config, Mode, OutputFormat
from loopaccel.testing import corpus_loop, corpus_path, requires_solver
from loops.services import apply_update
from nonterm.models import Certificate, NontermFailure
from oracle.services import verify_acceleration, verify_certificate
from solver.models import QueryKind, SolverQuery, SolverVerdict
from .models import AnalysisOutput, BatchOutput
from .renderers import render_json
from .runner import analyse, main, run
from .serializers import AnalysisOutputSerializer, BatchOutputSerializer

X1, X2 = Var('x1'), Var('x2')
x1, x2 = variable('x1'), variable('x2')

BROKEN = 'vars: x;\nguard: x > 0\nupdate: x := x + 1;'


def _call(name, *args, **options):
    out = io.StringIO()
    call_command(name, *args, stdout=out, **options)
    return out.getvalue()


class InputErrorTestCase(SimpleTestCase):
    """Test exit codes that need no solver."""

    def setUp(self):
        self.tmp = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, self.tmp)

    def test_syntax_error(self):
        """Test that a malformed loop file exits with code 2."""
        path = Path(self.tmp) / 'broken.loop'
        path.write_text(BROKEN)

        with self.assertRaises(CommandError) as ctx:
            _call('accelerate', str(path))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_missing_file(self):
        """Test that an unreadable path exits with code 2."""
        with self.assertRaises(CommandError) as ctx:
            _call('nonterm', str(Path(self.tmp) / 'absent.loop'))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_bad_option(self):
        """Test that invalid configuration exits with code 2."""
        with self.assertRaises(CommandError) as ctx:
            _call('accelerate', corpus_path('t_inc'), timeout_ms=0)
        self.assertEqual(ctx.exception.returncode, 2)

    @patch('solver.services.subprocess.run')
    def test_solver_missing(self, mock_run):
        """Test that a missing solver executable exits with code 3."""
        mock_run.side_effect = FileNotFoundError('z3')

        with self.assertRaises(CommandError) as ctx:
            _call('accelerate', corpus_path('t_nondec'))
        self.assertEqual(ctx.exception.returncode, 3)

    def test_acceleration_without_closed_form(self):
        """Test that a loop without closed form fails with code 1 before any solver call."""
        with patch('solver.services.subprocess.run') as mock_run:
            with self.assertRaises(CommandError) as ctx:
                _call('accelerate', corpus_path('t_nontriangular'))
        self.assertEqual(ctx.exception.returncode, 1)
        mock_run.assert_not_called()

    def test_main_usage(self):
        """Test that the script rejects an unknown mode."""
        with patch('sys.stderr', new_callable=io.StringIO) as err:
            self.assertEqual(main(['simplify', corpus_path('t_inc')]), 2)
            self.assertEqual(main([]), 2)
        self.assertIn('usage: loop-accel', err.getvalue())


class SchemaTestCase(SimpleTestCase):
    """Test validation of JSON read back."""

    def test_schema_version(self):
        """Test that another schema version is rejected."""
        data = {
            'schema': 2, 'file': 'a.loop', 'mode': 'nonterm', 'acceleration': None,
            'nontermination': None, 'verification': {'acceleration': None, 'certificate': None},
            'error': None, 'exit_code': 1,
        }
        serializer = AnalysisOutputSerializer(data=data)

        self.assertFalse(serializer.is_valid())
        self.assertIn('schema', serializer.errors)

        data['schema'] = 1
        self.assertTrue(AnalysisOutputSerializer(data=data).is_valid())

    def test_empty_batch(self):
        """Test the summary of a batch without loops."""
        batch = BatchOutput(directory='empty', mode=Mode.BOTH)
        data = BatchOutputSerializer(batch).data

        self.assertEqual(data['summary']['loops'], 0)
        self.assertEqual(data['exit_code'], 0)


class RoundTripTestCase(SimpleTestCase):
    """Test that every rendered document validates against its own serializer."""

    def setUp(self):
        nondec, evinc = corpus_loop('t_nondec'), corpus_loop('t_evinc')
        problem = canonical_problem(nondec)
        self.chi = Formula([problem.pending.clauses[1]])
        query = SolverQuery(
            QueryKind.IMPLICATION, self.chi, apply_update(self.chi, nondec.update), SolverVerdict.proved(),
        )
        step = ProofStep(
            technique=Technique.MONOTONIC_INCREASE,
            title=ACCELERATION_TITLES[Technique.MONOTONIC_INCREASE],
            clause=problem.pending.clauses[1],
            added=self.chi,
            exact=True,
            queries=(query,),
        )
        self.partial = AccelResult.from_problem(problem.advance(step))
        failed = AccelResult(nondec, Formula.true(), False, (), nondec.guard, reason='update is not triangular')
        cert = Certificate(evinc, Formula.of_atoms([Atom.gt0(x1), Atom.gt0(x2 + 1)]), {X1: 1, X2: 0}, ())
        refuted = NontermFailure(nondec, Formula.true(), (), nondec.guard, 'no technique applies')

        self.outputs = [
            AnalysisOutput(
                't_nondec.loop', Mode.ACCELERATE, acceleration=self.partial,
                acceleration_report=verify_acceleration(nondec, self.partial, 1, 2), exit_code=1,
            ),
            AnalysisOutput(
                't_evinc.loop', Mode.NONTERM, nontermination=cert,
                certificate_report=verify_certificate(evinc, cert, 50),
            ),
            AnalysisOutput('t_nondec.loop', Mode.BOTH, acceleration=failed, nontermination=refuted, exit_code=1),
            AnalysisOutput('z_broken.loop', Mode.BOTH, error='line 3: expected ;', exit_code=2),
        ]

    def test_single_documents(self):
        """Test reading back accelerate, nonterm and both documents with and without queries."""
        for output in self.outputs:
            for trace in (False, True):
                with self.subTest(mode=output.mode.value, file=output.file, trace=trace):
                    data = json.loads(render_json(output, trace))
                    serializer = AnalysisOutputSerializer(data=data)
                    self.assertTrue(serializer.is_valid(), serializer.errors)
                    self.assertEqual(serializer.validated_data['exit_code'], output.exit_code)

    def test_derived_fields_rendered(self):
        """Test that read-only fields still appear in the rendered document."""
        data = json.loads(render_json(self.outputs[0], trace=True))

        self.assertEqual(data['mode'], 'accelerate')
        acceleration = data['acceleration']
        self.assertEqual(acceleration['atoms'], [str(atom) for atom in self.partial.formula.atoms()])
        self.assertEqual(
            acceleration['closed_form'],
            {str(var): str(expr) for var, expr in self.partial.closed_form.mapping.items()},
        )
        step = acceleration['trace'][0]
        self.assertEqual(step['technique'], 'monotonic_increase')
        self.assertEqual(step['added'], [str(atom) for atom in self.chi.atoms()])
        self.assertEqual(step['queries'][0]['kind'], 'implication')

        self.assertIsNone(json.loads(render_json(self.outputs[2]))['acceleration']['closed_form'])

    def test_batch_document(self):
        """Test reading back a directory document."""
        batch = BatchOutput(directory='corpus', mode=Mode.BOTH, results=self.outputs)
        data = json.loads(render_json(batch, trace=True))

        serializer = BatchOutputSerializer(data=data)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(data['mode'], 'both')
        self.assertEqual(data['summary']['errors'], 1)
        self.assertEqual(data['exit_code'], 2)


class ScriptTestCase(SimpleTestCase):
    """Test the loop-accel script in a fresh interpreter."""

    def _script(self, *args):
        env = {key: value for key, value in os.environ.items() if key != 'DJANGO_SETTINGS_MODULE'}
        return subprocess.run(
            [sys.executable, str(settings.BASE_DIR / 'loop-accel'), *args],
            capture_output=True, text=True, env=env, cwd=settings.BASE_DIR, timeout=120,
        )

    def test_usage(self):
        """Test that an unknown mode prints usage and exits with code 2."""
        completed = self._script('simplify', corpus_path('t_inc'))
        self.assertEqual(completed.returncode, 2, completed.stderr)
        self.assertIn('usage: loop-accel', completed.stderr)

    def test_syntax_error(self):
        """Test that the script configures Django before running a command."""
        tmp = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, tmp)
        path = Path(tmp) / 'broken.loop'
        path.write_text(BROKEN)

        completed = self._script('accelerate', str(path))

        self.assertEqual(completed.returncode, 2, completed.stderr)
        self.assertNotIn('ImproperlyConfigured', completed.stderr)

    @requires_solver
    def test_certificate(self):
        """Test a certificate found through the script."""
        completed = self._script('nonterm', corpus_path('t_inc'))
        self.assertEqual(completed.returncode, 0, completed.stderr)
        self.assertIn('certificate: x > 0', completed.stdout)


@requires_solver
class CommandTestCase(SimpleTestCase):
    """Test the commands end to end with the installed solver."""

    def test_accelerate_text(self):
        """Test the text rendering of an exact acceleration."""
        out = _call('accelerate', corpus_path('t_nondec'))

        self.assertIn(f"file: {corpus_path('t_nondec')}", out)
        self.assertIn('exact: true', out)
        self.assertIn('formula: ', out)

    def test_nonterm_json(self):
        """Test that the JSON of a certificate validates against its own serializer."""
        out = _call('nonterm', corpus_path('t_fixpoint'), output='json')

        data = json.loads(out)
        self.assertEqual(data['schema'], 1)
        self.assertTrue(data['nontermination']['proved'])
        self.assertEqual(data['nontermination']['trace'][-1]['technique'], 'fixpoints')
        self.assertNotIn('queries', data['nontermination']['trace'][-1])
        self.assertIsNone(data['acceleration'])
        serializer = AnalysisOutputSerializer(data=data)
        self.assertTrue(serializer.is_valid(), serializer.errors)

    def test_json_round_trip(self):
        """Test that verified, traced documents of every mode validate when read back."""
        for mode in ('accelerate', 'nonterm', 'both'):
            with self.subTest(mode=mode):
                out = _call(
                    mode, corpus_path('t_evinc'), output='json', trace=True,
                    verify=True, box=1, max_n=3, sim_steps=50, extra_models=1,
                )
                data = json.loads(out)
                self.assertEqual(data['mode'], mode)
                serializer = AnalysisOutputSerializer(data=data)
                self.assertTrue(serializer.is_valid(), serializer.errors)

    def test_trace_includes_queries(self):
        """Test that solver queries are rendered with the trace flag."""
        data = json.loads(_call('accelerate', corpus_path('t_inc'), output='json', trace=True))
        step = data['acceleration']['trace'][0]
        self.assertTrue(step['queries'])
        self.assertEqual(step['queries'][0]['kind'], 'implication')

        out = _call('accelerate', corpus_path('t_inc'), trace=True)
        self.assertIn('trace:', out)
        self.assertIn('closed form:', out)

    def test_nonterm_failure(self):
        """Test that a terminating loop exits with code 1."""
        out = io.StringIO()
        with self.assertRaises(CommandError) as ctx:
            call_command('nonterm', corpus_path('t_nondec'), stdout=out)
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('no certificate found', out.getvalue())

    def test_both(self):
        """Test that both succeeds when either analysis does."""
        out = _call('both', corpus_path('t_inc'))
        self.assertIn('certificate: ', out)
        self.assertIn('exact: true', out)
        self.assertLess(out.index('certificate: '), out.index('exact: '))

        out = _call('both', corpus_path('t_nondec'))
        self.assertIn('no certificate found', out)

    def test_stdin(self):
        """Test reading the loop from stdin."""
        text = Path(corpus_path('t_inc')).read_text()
        out = _call('accelerate', '-', stdin=io.StringIO(text))
        self.assertIn('file: <stdin>', out)
        self.assertIn('exact: true', out)

    def test_verify(self):
        """Test that verification reports are rendered."""
        out = _call('both', corpus_path('t_evinc'), verify=True, box=2, max_n=5, sim_steps=100, extra_models=2)

        self.assertIn('verify acceleration:', out)
        self.assertIn('0 soundness violations', out)
        self.assertIn('verify certificate:', out)
        self.assertIn('simulated steps: 100', out)

    def test_smtlib(self):
        """Test the SMT-LIB rendering of an acceleration."""
        out = _call('accelerate', corpus_path('t_exp'), output='smtlib')

        self.assertIn('; acceleration (exact: true)', out)
        self.assertIn('(check-sat)', out)
        asserts = [line for line in out.splitlines() if line.startswith('(assert')]
        self.assertTrue(asserts)
        self.assertFalse(any('2^n' in line for line in asserts))

    def test_disable(self):
        """Test that disabled techniques are not tried."""
        with self.assertRaises(CommandError):
            _call('accelerate', corpus_path('t_evinc'), disable=['eventual_increase'])

    def test_directory(self):
        """Test a directory run with one malformed member."""
        tmp = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, tmp)
        for name in ('t_inc', 't_nondec'):
            shutil.copy(corpus_path(name), tmp)
        Path(tmp, 'z_broken.loop').write_text(BROKEN)
        Path(tmp, 'notes.txt').write_text('ignored')

        text, exit_code = run(tmp, Config.from_settings(mode=Mode.ACCELERATE, jobs=2))

        self.assertEqual(exit_code, 2)
        self.assertLess(text.index('t_inc.loop'), text.index('t_nondec.loop'))
        self.assertIn('summary: 3 loops, 2 exact, 0 approximate, 0 failed, 0 certificates, 1 errors', text)

        data = json.loads(run(tmp, Config.from_settings(mode=Mode.ACCELERATE, output=OutputFormat.JSON))[0])
        self.assertEqual([result['exit_code'] for result in data['results']], [0, 0, 2])
        serializer = BatchOutputSerializer(data=data)
        self.assertTrue(serializer.is_valid(), serializer.errors)

    def test_deterministic(self):
        """Test that repeated runs render identical JSON."""
        cfg = Config.from_settings(mode=Mode.BOTH, output=OutputFormat.JSON)
        first = run(corpus_path('t_nonterm4'), cfg)
        second = run(corpus_path('t_nonterm4'), cfg)
        self.assertEqual(first, second)

    def test_analyse_exit_code(self):
        """Test exit codes of in-memory analyses."""
        cfg = Config.from_settings(mode=Mode.ACCELERATE)
        self.assertEqual(analyse(corpus_loop('t_inc'), cfg, 't_inc').exit_code, 0)
        output = analyse(corpus_loop('t_cubic'), cfg, 't_cubic')
        self.assertIsInstance(output, AnalysisOutput)
        self.assertEqual(output.exit_code, 1)
