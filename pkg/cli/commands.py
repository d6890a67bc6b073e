"""
Shared implementation of the accelerate, nonterm and both management commands.
"""
import logging

from django.core.management.base import BaseCommand, CommandError

from loopaccel.config import TECHNIQUE_NAMES, Config, Mode, OutputFormat
from loopaccel.exceptions import LoopAccelError

from .runner import run

logger = logging.getLogger(__name__)


class AnalysisCommand(BaseCommand):
    """
    Analyse a loop file, stdin ('-') or a directory of .loop files.

    Exit codes: 0 success, 1 analysis failed, 2 input error, 3 solver error.
    """

    mode: Mode = Mode.ACCELERATE
    stealth_options = ('stdin',)

    def add_arguments(self, parser):
        parser.add_argument('path', help="Loop file, '-' for stdin, or a directory")
        parser.add_argument('--solver', dest='solver_path', help='SMT solver executable')
        parser.add_argument('--solver-arg', dest='solver_args', action='append',
                            help='Solver argument (repeatable; replaces the defaults)')
        parser.add_argument('--timeout', dest='timeout_ms', type=int, help='Per-query timeout in ms')
        parser.add_argument('--verify', action='store_true', help='Check results with the brute-force oracle')
        parser.add_argument('--box', type=int, help='Start states range over [-B, B]^d')
        parser.add_argument('--max-n', dest='max_n', type=int, help='Largest iteration count checked')
        parser.add_argument('--sim-steps', dest='sim_steps', type=int, help='Steps simulated per certificate model')
        parser.add_argument('--extra-models', dest='extra_models', type=int,
                            help='Additional certificate models to simulate')
        parser.add_argument('--format', dest='output', choices=[f.value for f in OutputFormat], default='text')
        parser.add_argument('--trace', action='store_true', help='Print closed forms, steps and solver queries')
        parser.add_argument('--jobs', type=int, help='Workers for directory inputs')
        parser.add_argument('--disable', action='append', default=[], choices=sorted(TECHNIQUE_NAMES),
                            help='Disable a technique (repeatable)')
        parser.add_argument('--metering', help='Candidate metering function over the loop variables')

    def build_config(self, options) -> Config:
        try:
            return Config.from_settings(
                mode=self.mode,
                solver_path=options.get('solver_path'),
                solver_args=tuple(options['solver_args']) if options.get('solver_args') else None,
                timeout_ms=options.get('timeout_ms'),
                verify=options.get('verify') or None,
                box=options.get('box'),
                max_n=options.get('max_n'),
                sim_steps=options.get('sim_steps'),
                extra_models=options.get('extra_models'),
                output=OutputFormat(options.get('output') or 'text'),
                trace=options.get('trace') or None,
                jobs=options.get('jobs'),
                disabled=frozenset(options.get('disable') or ()),
                metering=options.get('metering'),
            )
        except ValueError as e:
            raise CommandError(str(e), returncode=2)

    def handle(self, *args, **options):
        cfg = self.build_config(options)
        try:
            text, exit_code = run(options['path'], cfg, options.get('stdin'))
        except LoopAccelError as e:
            raise CommandError(str(e), returncode=e.exit_code)
        except OSError as e:
            raise CommandError(f"cannot read {options['path']}: {e}", returncode=2)

        self.stdout.write(text, ending='')
        if exit_code:
            raise CommandError('analysis failed', returncode=exit_code)
