from cli.commands import AnalysisCommand
from loopaccel.config import Mode


class Command(AnalysisCommand):
    help = 'Accelerate a loop: print a formula relating start state, iteration count n and end state'
    mode = Mode.ACCELERATE
