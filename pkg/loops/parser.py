"""
Parser and renderer for the loop input format.

    vars: x1, x2;
    guard: x1 > 0 && (x2 > 0 || x1 >= 5);   # comments run to end of line
    update: x1 := x1 - 1; x2 := x2 + 1;

Guards are CNF; `||` only appears inside parenthesized clause groups.
Relations are normalized to atoms e > 0 over the integers, and `==` becomes
two strict inequalities.
"""
import itertools
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from expr.models import Atom, Clause, Formula, N, PolyExp, Var
from loopaccel.exceptions import (
    DisallowedConstruct,
    LoopSyntaxError,
    NonPolynomialUpdate,
    UndeclaredVariable,
)

from .models import Loop, Update

TOKEN_SPEC = [
    ('COMMENT', r'#[^\n]*'),
    ('NUMBER', r'\d+'),
    ('IDENT', r"[A-Za-z_][A-Za-z0-9_]*"),
    ('OP', r':=|&&|\|\||>=|<=|==|!=|[-+*^()<>;,:/%!=]'),
    ('NEWLINE', r'\n'),
    ('SKIP', r'[ \t\r]+'),
    ('MISMATCH', r'.'),
]
TOKEN_RE = re.compile('|'.join(f'(?P<{name}>{pattern})' for name, pattern in TOKEN_SPEC))

SECTIONS = ('vars', 'guard', 'update')
RELATIONS = ('>', '>=', '<', '<=', '==')
DISALLOWED_WORDS = {'forall', 'exists', 'not', 'and', 'or', 'if', 'then', 'else', 'while', 'ite'}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    tokens = []
    line, line_start = 1, 0
    for match in TOKEN_RE.finditer(text):
        kind, value = match.lastgroup, match.group()
        col = match.start() - line_start + 1
        if kind == 'NEWLINE':
            line, line_start = line + 1, match.end()
            continue
        if kind in ('SKIP', 'COMMENT'):
            continue
        if kind == 'MISMATCH':
            raise LoopSyntaxError(f'unexpected character {value!r}', line, col)
        tokens.append(Token(kind, value, line, col))
    tokens.append(Token('END', '', line, len(text) - line_start + 1))
    return tokens


class _Parser:
    """Recursive-descent parser over the token list."""

    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.declared: Dict[str, Var] = {}
        self.section = 'vars'

    # Token helpers

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str, token: Optional[Token] = None) -> LoopSyntaxError:
        token = token or self.current
        return LoopSyntaxError(message, token.line, token.col)

    def accept(self, text: str) -> bool:
        if self.current.text == text and self.current.kind != 'END':
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        token = self.current
        if not self.accept(text):
            found = token.text or 'end of input'
            raise self.error(f'expected {text!r}, found {found!r}')
        return token

    def unsupported(self, what: str, token: Token):
        where = f'line {token.line}, column {token.col}'
        if self.section == 'update':
            return NonPolynomialUpdate(f'{what} is not polynomial ({where})')
        return DisallowedConstruct(f'{what} is not allowed ({where})')

    # Grammar

    def parse_file(self) -> Loop:
        self.section_header('vars')
        variables = [self.declare(self.expect_ident())]
        while self.accept(','):
            variables.append(self.declare(self.expect_ident()))
        self.expect(';')

        self.section_header('guard')
        guard = self.cnf()
        self.expect(';')

        self.section_header('update')
        assignments: Dict[Var, PolyExp] = {}
        self.assignment(assignments)
        while self.accept(';'):
            if self.current.kind == 'END':
                break
            self.assignment(assignments)
        if self.current.kind != 'END':
            raise self.error(f'unexpected {self.current.text!r} after the update')

        update = Update.from_mapping(variables, assignments)
        return Loop(tuple(variables), guard, update)

    def section_header(self, name: str):
        token = self.current
        if token.text != name:
            raise self.error(f"expected section '{name}:'", token)
        self.pos += 1
        self.expect(':')
        self.section = name

    def expect_ident(self) -> Token:
        token = self.current
        if token.kind != 'IDENT':
            raise self.error('expected an identifier', token)
        self.pos += 1
        return token

    def declare(self, token: Token) -> Var:
        if token.text == N.name:
            raise DisallowedConstruct(f"'{N.name}' is reserved for the iteration counter (line {token.line})")
        if token.text in SECTIONS or token.text in DISALLOWED_WORDS or token.text == 'true':
            raise self.error(f'{token.text!r} cannot be used as a variable name', token)
        if token.text in self.declared:
            raise self.error(f'variable {token.text} declared twice', token)
        var = Var(token.text)
        self.declared[token.text] = var
        return var

    def lookup(self, token: Token) -> Var:
        if token.text in DISALLOWED_WORDS:
            raise DisallowedConstruct(f'{token.text!r} is not supported (line {token.line}, column {token.col})')
        var = self.declared.get(token.text)
        if var is None:
            raise UndeclaredVariable(f'undeclared variable {token.text} (line {token.line}, column {token.col})')
        return var

    def assignment(self, assignments: Dict[Var, PolyExp]):
        token = self.expect_ident()
        var = self.lookup(token)
        if var in assignments:
            raise self.error(f'{var} is assigned twice', token)
        self.expect(':=')
        assignments[var] = self.poly()

    def cnf(self) -> Formula:
        if self.current.text == 'true':
            self.pos += 1
            return Formula.true()
        clauses = self.clause()
        while self.accept('&&'):
            clauses.extend(self.clause())
        return Formula(clauses)

    def clause(self) -> List[Clause]:
        if self.current.text == '(':
            start = self.pos
            try:
                self.pos += 1
                alternatives = [self.relation()]
                while self.accept('||'):
                    alternatives.append(self.relation())
                self.expect(')')
            except LoopSyntaxError:
                self.pos = start
            else:
                return [Clause(choice) for choice in itertools.product(*alternatives)]
        if self.current.text in ('!', '!='):
            raise self.unsupported(f'{self.current.text!r}', self.current)
        return [Clause([atom]) for atom in self.relation()]

    def relation(self) -> List[Atom]:
        """Atoms whose conjunction is equivalent to `left rel right`."""
        left = self.poly()
        token = self.current
        if token.text == '!=':
            raise self.unsupported("'!='", token)
        if token.text not in RELATIONS:
            raise self.error('expected a relation (>, >=, <, <=, ==)', token)
        self.pos += 1
        right = self.poly()
        if token.text == '>':
            return [Atom.gt0(left - right)]
        if token.text == '>=':
            return [Atom.geq0(left - right)]
        if token.text == '<':
            return [Atom.gt0(right - left)]
        if token.text == '<=':
            return [Atom.geq0(right - left)]
        return [Atom.geq0(left - right), Atom.geq0(right - left)]

    def poly(self) -> PolyExp:
        result = self.term()
        while self.current.text in ('+', '-'):
            op = self.current.text
            self.pos += 1
            right = self.term()
            result = result + right if op == '+' else result - right
        return result

    def term(self) -> PolyExp:
        result = self.unary()
        while True:
            token = self.current
            if token.text == '*':
                self.pos += 1
                result = result * self.unary()
            elif token.text in ('/', '%'):
                raise self.unsupported(f'{token.text!r}', token)
            else:
                return result

    def unary(self) -> PolyExp:
        if self.accept('-'):
            return -self.unary()
        if self.accept('+'):
            return self.unary()
        return self.power()

    def power(self) -> PolyExp:
        base = self.primary()
        if self.current.text == '^':
            caret = self.current
            self.pos += 1
            exponent = self.current
            if exponent.kind != 'NUMBER':
                raise self.unsupported('a non-constant exponent', caret)
            self.pos += 1
            return base ** int(exponent.text)
        return base

    def primary(self) -> PolyExp:
        token = self.current
        if token.kind == 'NUMBER':
            self.pos += 1
            return PolyExp.const(int(token.text))
        if token.kind == 'IDENT':
            self.pos += 1
            return PolyExp.var(self.lookup(token))
        if self.accept('('):
            inner = self.poly()
            self.expect(')')
            return inner
        if token.text in ('!', '!='):
            raise self.unsupported(f'{token.text!r}', token)
        raise self.error(f"unexpected {token.text or 'end of input'!r}", token)


def parse_loop(text: str) -> Loop:
    """
    Parse loop source text.

    Raises:
        LoopSyntaxError, UndeclaredVariable, NonPolynomialUpdate, DisallowedConstruct
    """
    return _Parser(text).parse_file()


def parse_polyexp(text: str, variables: Sequence[Var]) -> PolyExp:
    """Parse a standalone integer polynomial over the given variables."""
    parser = _Parser(text)
    parser.declared = {var.name: var for var in variables}
    parser.section = 'expression'
    result = parser.poly()
    if parser.current.kind != 'END':
        raise parser.error(f'unexpected {parser.current.text!r}')
    return result


def render_loop(loop: Loop) -> str:
    """Render a loop in the input format; parse_loop(render_loop(l)) == l."""
    names = ', '.join(str(var) for var in loop.variables)
    assignments = '; '.join(f'{var} := {rhs}' for var, rhs in loop.update.assignments)
    return f'vars: {names};\nguard: {loop.guard};\nupdate: {assignments};\n'
