from cli.commands import AnalysisCommand
from loopaccel.config import Mode


class Command(AnalysisCommand):
    help = 'Prove non-termination, then accelerate; succeeds if either analysis does'
    mode = Mode.BOTH
