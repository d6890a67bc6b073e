"""
Text, JSON and SMT-LIB renderings of analysis outcomes.
"""
from typing import List, Union

from rest_framework.renderers import JSONRenderer

from accel.models import AccelResult, ProofStep
from expr.models import Formula
from nonterm.models import Certificate, NontermFailure
from oracle.models import VerifyReport
from solver.smtlib import to_smtlib

from .models import AnalysisOutput, BatchOutput
from .serializers import AnalysisOutputSerializer, BatchOutputSerializer

Output = Union[AnalysisOutput, BatchOutput]


def _bool(value: bool) -> str:
    return 'true' if value else 'false'


def _trace_lines(trace: List[ProofStep], with_queries: bool) -> List[str]:
    lines = ['trace:']
    for index, step in enumerate(trace, start=1):
        lines.append(f'  {index}. {step}')
        if step.note:
            lines.append(f'     note: {step.note}')
        if with_queries:
            lines.extend(f'     {query}' for query in step.queries)
    return lines


def _acceleration_lines(result: AccelResult, trace: bool) -> List[str]:
    if result.success:
        lines = [f'formula: {result.formula}', f'exact: {_bool(result.exact)}']
    else:
        lines = [f'acceleration failed: {result.reason}', f'leftover: {result.leftover}']
    if trace:
        lines.append(f'closed form: {result.closed_form if result.closed_form else "none"}')
        lines += _trace_lines(result.trace, with_queries=True)
    return lines


def _nonterm_lines(outcome: Union[Certificate, NontermFailure], trace: bool) -> List[str]:
    if outcome.proved:
        witness = ', '.join(f'{var} = {value}' for var, value in outcome.witness.items())
        lines = [f'certificate: {outcome.formula}', f'witness: {witness}']
        if outcome.simulated_steps is not None:
            lines.append(f'simulated steps: {outcome.simulated_steps}')
    else:
        lines = ['no certificate found', f'leftover: {outcome.leftover}']
    if trace:
        lines += _trace_lines(outcome.trace, with_queries=True)
    return lines


def _report_line(report: VerifyReport) -> str:
    if report.kind == 'acceleration':
        return (
            f"verify acceleration: {report.checked} runs (box {report.bounds['box']}, "
            f"max n {report.bounds['max_n']}), {len(report.soundness_violations)} soundness violations, "
            f"{len(report.exactness_violations)} exactness violations"
        )
    return (
        f"verify certificate: {report.models_checked} models, {report.simulated_steps} steps, "
        f"{len(report.soundness_violations)} violations"
    )


def render_text(output: AnalysisOutput, trace: bool = False) -> str:
    lines = [f'file: {output.file}']
    if output.error:
        lines.append(f'error: {output.error}')
    if output.nontermination is not None:
        lines += _nonterm_lines(output.nontermination, trace)
    if output.acceleration is not None:
        lines += _acceleration_lines(output.acceleration, trace)
    for report in (output.acceleration_report, output.certificate_report):
        if report is not None:
            lines.append(_report_line(report))
    return '\n'.join(lines) + '\n'


def render_batch_text(batch: BatchOutput, trace: bool = False) -> str:
    sections = [render_text(result, trace) for result in batch.results]
    summary = batch.summary
    sections.append(
        f"summary: {summary['loops']} loops, {summary['exact']} exact, "
        f"{summary['approximate']} approximate, {summary['failed']} failed, "
        f"{summary['certificates']} certificates, {summary['errors']} errors\n"
    )
    return '\n'.join(sections)


def _smtlib_section(formula: Formula, comments: List[str]) -> str:
    header = ''.join(f'; {comment}\n' for comment in comments)
    return header + to_smtlib(formula)


def render_smtlib(output: AnalysisOutput) -> str:
    """
    QF_NIA scripts: the exponential-free projection of an acceleration formula
    with closed-form bindings as comments, and certificate formulas.
    """
    sections = [f'; file: {output.file}\n']
    outcome = output.nontermination
    if outcome is not None:
        if outcome.proved:
            sections.append(_smtlib_section(outcome.formula, ['certificate of non-termination']))
        else:
            sections.append('; no certificate found\n')

    result = output.acceleration
    if result is not None:
        if result.success:
            comments = [f'acceleration (exact: {_bool(result.exact)})']
            comments += [f"{var.primed} = {expr}" for var, expr in result.closed_form.mapping.items()]
            projection = Formula(clause for clause in result.formula if not clause.has_exponential())
            sections.append(_smtlib_section(projection, comments))
        else:
            sections.append(f'; acceleration failed: {result.reason}\n')
    return ''.join(sections)


def render_json(output: Output, trace: bool = False) -> str:
    """Indented JSON via the REST framework renderer; newline terminated."""
    serializer_class = BatchOutputSerializer if isinstance(output, BatchOutput) else AnalysisOutputSerializer
    data = serializer_class(output, context={'trace': trace}).data
    return JSONRenderer().render(data, renderer_context={'indent': 2}).decode('utf-8') + '\n'
