"""
Analysis outcomes as presented by the command-line frontend.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Union

from accel.models import AccelResult
from loopaccel.config import Mode
from nonterm.models import Certificate, NontermFailure
from oracle.models import VerifyReport

SCHEMA_VERSION = 1


@dataclass
class AnalysisOutput:
    """Everything computed for one input loop."""

    file: str
    mode: Mode
    acceleration: Optional[AccelResult] = None
    nontermination: Optional[Union[Certificate, NontermFailure]] = None
    acceleration_report: Optional[VerifyReport] = None
    certificate_report: Optional[VerifyReport] = None
    error: Optional[str] = None
    exit_code: int = 0

    schema = SCHEMA_VERSION

    @property
    def succeeded(self) -> bool:
        accelerated = self.acceleration is not None and self.acceleration.success
        proved = self.nontermination is not None and self.nontermination.proved
        if self.mode is Mode.ACCELERATE:
            return accelerated
        if self.mode is Mode.NONTERM:
            return proved
        return accelerated or proved

    @property
    def verified(self) -> bool:
        reports = [r for r in (self.acceleration_report, self.certificate_report) if r is not None]
        return all(report.accepted for report in reports)


@dataclass
class BatchOutput:
    """Outcomes for every loop of a directory, in file name order."""

    directory: str
    mode: Mode
    results: List[AnalysisOutput] = field(default_factory=list)

    schema = SCHEMA_VERSION

    @property
    def exit_code(self) -> int:
        return max((result.exit_code for result in self.results), default=0)

    @property
    def summary(self) -> dict:
        accelerations = [r.acceleration for r in self.results if r.acceleration is not None]
        outcomes = [r.nontermination for r in self.results if r.nontermination is not None]
        return {
            'loops': len(self.results),
            'exact': sum(1 for a in accelerations if a.success and a.exact),
            'approximate': sum(1 for a in accelerations if a.success and not a.exact),
            'failed': sum(1 for a in accelerations if not a.success),
            'certificates': sum(1 for o in outcomes if o.proved),
            'errors': sum(1 for r in self.results if r.error),
        }
