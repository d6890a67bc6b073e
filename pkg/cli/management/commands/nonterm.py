from cli.commands import AnalysisCommand
from loopaccel.config import Mode


class Command(AnalysisCommand):
    help = 'Search a certificate of non-termination and a diverging start state'
    mode = Mode.NONTERM
