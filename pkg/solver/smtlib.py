"""
SMT-LIB2 printing and solver reply parsing (QF_NIA).
"""
import re
from typing import Dict, Iterable, List, Tuple, Union

from expr.models import Atom, AtomKind, Clause, Formula, PolyExp, Var
from loopaccel.exceptions import ProtocolError, UnsupportedTerm

SIMPLE_SYMBOL = re.compile(r'^[A-Za-z~!@$%^&*_+=<>.?/-][A-Za-z0-9~!@$%^&*_+=<>.?/-]*$')
SEXP_TOKEN = re.compile(r'\(|\)|\|[^|]*\||"(?:[^"]|"")*"|[^\s()|"]+')
STATUSES = ('sat', 'unsat', 'unknown')

SExp = Union[str, List['SExp']]


def symbol(var: Var) -> str:
    return var.name if SIMPLE_SYMBOL.match(var.name) else f'|{var.name}|'


def _literal(value: int) -> str:
    return str(value) if value >= 0 else f'(- {-value})'


def term(expr: PolyExp) -> str:
    """Integer-coefficient polynomial as an SMT-LIB2 term."""
    if expr.has_exponential():
        raise UnsupportedTerm(f'exponential term in {expr}')
    pieces = []
    for mono, _, coeff in expr.terms():
        if coeff.denominator != 1:
            raise UnsupportedTerm(f'rational coefficient in {expr}')
        coeff = coeff.numerator
        factors = [symbol(var) for var, exp in mono for _ in range(exp)]
        if not factors:
            pieces.append(_literal(coeff))
            continue
        product = factors[0] if len(factors) == 1 else f"(* {' '.join(factors)})"
        if coeff == 1:
            pieces.append(product)
        elif coeff == -1:
            pieces.append(f'(- {product})')
        else:
            pieces.append(f"(* {_literal(coeff)} {' '.join(factors)})")
    if not pieces:
        return '0'
    if len(pieces) == 1:
        return pieces[0]
    return f"(+ {' '.join(pieces)})"


def atom(a: Atom) -> str:
    a = a.integral()
    op = '>' if a.kind is AtomKind.GT0 else '='
    return f'({op} {term(a.lhs)} 0)'


def clause(c: Clause) -> str:
    if len(c) == 1:
        return atom(c.atoms[0])
    return f"(or {' '.join(atom(a) for a in c)})"


def conjunction(formula: Formula) -> str:
    if formula.is_true:
        return 'true'
    if len(formula) == 1:
        return clause(formula.clauses[0])
    return f"(and {' '.join(clause(c) for c in formula)})"


def script(variables: Iterable[Var], assertions: Iterable[str]) -> str:
    """Deterministic script: declarations sorted by name, assertions in order."""
    lines = ['(set-logic QF_NIA)']
    lines += [f'(declare-const {symbol(var)} Int)' for var in sorted(set(variables))]
    lines += [f'(assert {assertion})' for assertion in assertions]
    lines += ['(check-sat)', '(get-model)']
    return '\n'.join(lines) + '\n'


def to_smtlib(formula: Formula) -> str:
    """Satisfiability script for an exponential-free formula."""
    return script(formula.variables(), [clause(c) for c in formula])


def implication_script(premise: Formula, conclusion: Formula) -> str:
    """Script that is unsat iff premise implies conclusion."""
    variables = premise.variables() | conclusion.variables()
    assertions = [clause(c) for c in premise] + [f'(not {conjunction(conclusion)})']
    return script(variables, assertions)


def _read_sexps(tokens: List[str]) -> List[SExp]:
    stack: List[List[SExp]] = [[]]
    for token in tokens:
        if token == '(':
            stack.append([])
        elif token == ')':
            if len(stack) == 1:
                raise ProtocolError('unbalanced parentheses in solver reply')
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(token)
    if len(stack) != 1:
        raise ProtocolError('unbalanced parentheses in solver reply')
    return stack[0]


def _int_value(value: SExp) -> int:
    if isinstance(value, str):
        return int(value)
    if len(value) == 2 and value[0] == '-':
        return -_int_value(value[1])
    raise ValueError(value)


def _definitions(sexp: SExp) -> Iterable[Tuple[str, SExp]]:
    if isinstance(sexp, str):
        return
    if len(sexp) == 5 and sexp[0] == 'define-fun' and sexp[2] == [] and sexp[3] == 'Int':
        yield sexp[1], sexp[4]
        return
    for child in sexp:
        yield from _definitions(child)


def parse_reply(text: str) -> Tuple[str, Dict[str, int]]:
    """
    Split a solver reply into its check-sat status and the integer model.

    Raises:
        ProtocolError: The reply does not start with sat/unsat/unknown or is malformed
    """
    tokens = SEXP_TOKEN.findall(text)
    if not tokens or tokens[0] not in STATUSES:
        raise ProtocolError(f'unexpected solver reply: {text.strip()[:200]!r}')
    status = tokens[0]
    model: Dict[str, int] = {}
    if status == 'sat':
        for name, value in _definitions(_read_sexps(tokens[1:])):
            try:
                model[name.strip('|')] = _int_value(value)
            except ValueError:
                raise ProtocolError(f'cannot read model value for {name}: {value}') from None
    return status, model
