"""
Helpers for the test suites.
"""
import shutil
import unittest

from django.conf import settings

from loops.models import Loop
from loops.parser import parse_loop


def corpus_path(name: str) -> str:
    return str(settings.LOOPACCEL_CORPUS_DIR / f'{name}.loop')


def corpus_loop(name: str) -> Loop:
    """Parse corpus/<name>.loop."""
    return parse_loop((settings.LOOPACCEL_CORPUS_DIR / f'{name}.loop').read_text())


def solver_available() -> bool:
    return shutil.which(settings.LOOPACCEL_SMT_BIN) is not None


def requires_solver(test_item):
    """Skip unless the configured SMT solver is on PATH."""
    return unittest.skipUnless(solver_available(), f'{settings.LOOPACCEL_SMT_BIN} not installed')(test_item)
