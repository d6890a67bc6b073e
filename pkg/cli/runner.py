"""
Running analyses for files, stdin and directories.
"""
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import IO, List, Optional, Sequence, Tuple

from accel.services import accelerate
from loopaccel.config import Config, Mode, OutputFormat
from loopaccel.exceptions import LoopAccelError
from loops.models import Loop
from loops.parser import parse_loop
from nonterm.services import prove_nonterm
from oracle.services import verify_acceleration, verify_certificate
from solver.services import SMTClient

from .models import AnalysisOutput, BatchOutput
from .renderers import render_batch_text, render_json, render_smtlib, render_text

logger = logging.getLogger(__name__)

LOOP_SUFFIX = '.loop'
STDIN = '-'


def analyse(loop: Loop, cfg: Config, name: str, solver: Optional[SMTClient] = None) -> AnalysisOutput:
    """
    Run the analyses the mode asks for, then the oracle when verification is on.

    In both mode non-termination is tried first.
    """
    solver = solver or cfg.make_solver()
    output = AnalysisOutput(file=name, mode=cfg.mode)

    if cfg.mode in (Mode.NONTERM, Mode.BOTH):
        output.nontermination = prove_nonterm(loop, cfg, solver)
    if cfg.mode in (Mode.ACCELERATE, Mode.BOTH):
        output.acceleration = accelerate(loop, cfg, solver)

    if cfg.verify:
        if output.acceleration is not None and output.acceleration.success:
            output.acceleration_report = verify_acceleration(
                loop, output.acceleration, cfg.box_for(loop.dimension), cfg.max_n
            )
        if output.nontermination is not None and output.nontermination.proved:
            output.certificate_report = verify_certificate(
                loop, output.nontermination, cfg.sim_steps, solver.fresh(), cfg.extra_models
            )
            output.nontermination = output.nontermination.with_simulation(cfg.sim_steps)

    output.exit_code = 0 if output.succeeded and output.verified else 1
    if not output.verified:
        logger.error(f"Oracle rejected the result for {name}")
    return output


def read_source(path: str, stdin: Optional[IO[str]] = None) -> Tuple[str, str]:
    """(display name, loop text) of a file or of stdin for '-'."""
    if path == STDIN:
        return '<stdin>', (stdin or sys.stdin).read()
    return path, Path(path).read_text()


def analyse_source(path: str, cfg: Config, stdin: Optional[IO[str]] = None) -> AnalysisOutput:
    name, text = read_source(path, stdin)
    return analyse(parse_loop(text), cfg, name)


def _analyse_member(path: str, cfg: Config) -> AnalysisOutput:
    try:
        return analyse_source(path, cfg)
    except LoopAccelError as e:
        logger.error(f"{path}: {e}")
        return AnalysisOutput(file=path, mode=cfg.mode, error=str(e), exit_code=e.exit_code)


def analyse_directory(directory: str, cfg: Config) -> BatchOutput:
    """Analyse every loop file of a directory, one solver client per task."""
    paths = sorted(str(p) for p in Path(directory).iterdir() if p.suffix == LOOP_SUFFIX)
    logger.info(f"Analysing {len(paths)} loops with {cfg.jobs} workers")
    with ThreadPoolExecutor(max_workers=cfg.jobs) as executor:
        results = list(executor.map(lambda path: _analyse_member(path, cfg), paths))
    return BatchOutput(directory=directory, mode=cfg.mode, results=results)


def render(output, cfg: Config) -> str:
    if cfg.output is OutputFormat.JSON:
        return render_json(output, cfg.trace)
    if isinstance(output, BatchOutput):
        if cfg.output is OutputFormat.SMTLIB:
            return ''.join(render_smtlib(result) for result in output.results)
        return render_batch_text(output, cfg.trace)
    if cfg.output is OutputFormat.SMTLIB:
        return render_smtlib(output)
    return render_text(output, cfg.trace)


def run(path: str, cfg: Config, stdin: Optional[IO[str]] = None) -> Tuple[str, int]:
    """
    Analyse a file, stdin or a directory.

    Returns:
        Tuple of the rendered output and the exit code

    Raises:
        LoopAccelError: Single inputs only; directory members report errors in their output
    """
    if path != STDIN and Path(path).is_dir():
        output = analyse_directory(path, cfg)
    else:
        output = analyse_source(path, replace(cfg, jobs=1), stdin)
    return render(output, cfg), output.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of the loop-accel script: loop-accel accelerate|nonterm|both FILE [options]."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'loopaccel.settings')
    from django.core.management import execute_from_command_line

    args: List[str] = list(sys.argv[1:] if argv is None else argv)
    modes = [mode.value for mode in Mode]
    if not args or args[0] not in modes:
        sys.stderr.write(f"usage: loop-accel {{{','.join(modes)}}} FILE [options]\n")
        return 2
    try:
        execute_from_command_line(['loop-accel', *args])
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    return 0
