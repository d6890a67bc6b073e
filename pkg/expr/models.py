"""
Exact symbolic algebra for loop analysis.

PolyExp is a finite sum of terms c * monomial * b^n with rational c, where n is
the designated iteration counter. Atoms, clauses and CNF formulas are built on
top of it.
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import gcd
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from loopaccel.exceptions import NonIntegerResult, UnboundVariable, UnsupportedComposition

Number = Union[int, Fraction]

COUNTER_NAME = 'n'


@dataclass(frozen=True, order=True)
class Var:
    """A program variable, a primed post-state variable, or the counter n."""

    name: str

    def __str__(self):
        return self.name

    @property
    def primed(self) -> 'Var':
        return Var(f"{self.name}'")

    @property
    def is_primed(self) -> bool:
        return self.name.endswith("'")


N = Var(COUNTER_NAME)

Monomial = Tuple[Tuple[Var, int], ...]
TermKey = Tuple[Monomial, int]


def _mono_mul(left: Monomial, right: Monomial) -> Monomial:
    powers = dict(left)
    for var, exp in right:
        powers[var] = powers.get(var, 0) + exp
    return tuple(sorted(powers.items()))


def _mono_degree(mono: Monomial) -> int:
    return sum(exp for _, exp in mono)


def _mono_str(mono: Monomial) -> str:
    return '*'.join(str(var) if exp == 1 else f'{var}^{exp}' for var, exp in mono)


def _term_order(key: TermKey):
    mono, base = key
    return (
        base == 1,
        abs(base),
        base,
        -_mono_degree(mono),
        tuple((var.name, -exp) for var, exp in mono),
    )


def _fraction_str(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f'{value.numerator}/{value.denominator}'


class PolyExp:
    """
    Canonical poly-exponential expression.

    Terms map (monomial, base) to a nonzero rational coefficient; base 1 is the
    pure polynomial part. Instances are immutable.
    """

    __slots__ = ('_terms', '_hash')

    def __init__(self, terms: Optional[Mapping[TermKey, Number]] = None):
        canonical: Dict[TermKey, Fraction] = {}
        for (mono, base), coeff in (terms or {}).items():
            if base == 0:
                raise ValueError('exponential base must be nonzero')
            key = (tuple(sorted((v, e) for v, e in mono if e)), base)
            canonical[key] = canonical.get(key, 0) + Fraction(coeff)
        self._terms = {key: coeff for key, coeff in canonical.items() if coeff}
        self._hash = None

    @classmethod
    def const(cls, value: Number) -> 'PolyExp':
        return cls({((), 1): value})

    @classmethod
    def var(cls, var: Var) -> 'PolyExp':
        return cls({(((var, 1),), 1): 1})

    @classmethod
    def exp(cls, base: int) -> 'PolyExp':
        """The exponential base^n."""
        return cls({((), base): 1})

    # Arithmetic

    @staticmethod
    def _coerce(other) -> Optional['PolyExp']:
        if isinstance(other, PolyExp):
            return other
        if isinstance(other, (int, Fraction)):
            return PolyExp.const(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self._terms)
        for key, coeff in other._terms.items():
            terms[key] = terms.get(key, 0) + coeff
        return PolyExp(terms)

    __radd__ = __add__

    def __neg__(self):
        return PolyExp({key: -coeff for key, coeff in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms: Dict[TermKey, Fraction] = {}
        for (mono_a, base_a), coeff_a in self._terms.items():
            for (mono_b, base_b), coeff_b in other._terms.items():
                # b1^n * b2^n = (b1*b2)^n
                key = (_mono_mul(mono_a, mono_b), base_a * base_b)
                terms[key] = terms.get(key, 0) + coeff_a * coeff_b
        return PolyExp(terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, (int, Fraction)) or not other:
            return NotImplemented
        return self * (1 / Fraction(other))

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError('only natural exponents are supported')
        result = PolyExp.const(1)
        for _ in range(exponent):
            result = result * self
        return result

    # Structure

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def __repr__(self):
        return f'PolyExp({self})'

    def terms(self) -> List[Tuple[Monomial, int, Fraction]]:
        """Terms in canonical rendering order."""
        return [(mono, base, self._terms[(mono, base)]) for mono, base in sorted(self._terms, key=_term_order)]

    def variables(self) -> FrozenSet[Var]:
        """Variables occurring in monomials (the counter only if it occurs polynomially)."""
        return frozenset(var for mono, _ in self._terms for var, _ in mono)

    def has_exponential(self) -> bool:
        return any(base != 1 for _, base in self._terms)

    def mentions_counter(self) -> bool:
        return self.has_exponential() or N in self.variables()

    def is_constant(self) -> bool:
        return all(key == ((), 1) for key in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get(((), 1), Fraction(0))

    def is_integer_polynomial(self) -> bool:
        return not self.has_exponential() and all(c.denominator == 1 for c in self._terms.values())

    def total_degree(self) -> int:
        return max((_mono_degree(mono) for mono, _ in self._terms), default=0)

    def linear_coefficient(self, var: Var) -> Fraction:
        """Coefficient of the plain monomial var (degree 1, no exponential)."""
        return self._terms.get((((var, 1),), 1), Fraction(0))

    def collect(self, var: Var) -> Dict[int, 'PolyExp']:
        """Group terms by the power of var; coefficients no longer mention var."""
        groups: Dict[int, Dict[TermKey, Fraction]] = {}
        for (mono, base), coeff in self._terms.items():
            power = dict(mono).get(var, 0)
            rest = tuple((v, e) for v, e in mono if v != var)
            groups.setdefault(power, {})[(rest, base)] = coeff
        return {power: PolyExp(terms) for power, terms in groups.items()}

    def by_base(self) -> Dict[int, 'PolyExp']:
        """Split into polynomial parts per exponential base."""
        groups: Dict[int, Dict[TermKey, Fraction]] = {}
        for (mono, base), coeff in self._terms.items():
            groups.setdefault(base, {})[(mono, 1)] = coeff
        return {base: PolyExp(terms) for base, terms in groups.items()}

    def times_exp(self, base: int) -> 'PolyExp':
        return self * PolyExp.exp(base)

    def denominator_lcm(self) -> int:
        result = 1
        for coeff in self._terms.values():
            result = result * coeff.denominator // gcd(result, coeff.denominator)
        return result

    def content(self) -> Fraction:
        """Positive rational c such that self / c has coprime integer coefficients."""
        if not self._terms:
            return Fraction(1)
        scale = self.denominator_lcm()
        common = 0
        for coeff in self._terms.values():
            common = gcd(common, (coeff * scale).numerator)
        return Fraction(common, scale)

    def leading_sign(self) -> int:
        terms = self.terms()
        if not terms:
            return 0
        return 1 if terms[0][2] > 0 else -1

    # Evaluation and substitution

    def value(self, env: Mapping[Var, int]) -> Fraction:
        """Exact rational value under env."""
        total = Fraction(0)
        for (mono, base), coeff in self._terms.items():
            term = coeff
            try:
                for var, exp in mono:
                    term *= env[var] ** exp
                if base != 1:
                    term *= Fraction(base) ** env[N]
            except KeyError as exc:
                raise UnboundVariable(f'no value for {exc.args[0]} in {self}') from None
            total += term
        return total

    def evaluate(self, env: Mapping[Var, int]) -> int:
        """Exact integer value under env; non-integral values signal a malformed expression."""
        result = self.value(env)
        if result.denominator != 1:
            raise NonIntegerResult(f'{self} evaluates to {_fraction_str(result)}')
        return result.numerator

    def substitute(self, sigma: Mapping[Var, 'PolyExp']) -> 'PolyExp':
        """Simultaneous substitution."""
        if not sigma:
            return self
        counter_image = sigma.get(N)
        terms: Dict[TermKey, Fraction] = {}
        for (mono, base), coeff in self._terms.items():
            product = PolyExp.const(coeff)
            for var, exp in mono:
                image = sigma.get(var)
                product = product * ((image if image is not None else PolyExp.var(var)) ** exp)
            if base != 1:
                product = product * _exponential_image(base, counter_image)
            for key, value in product._terms.items():
                terms[key] = terms.get(key, 0) + value
        return PolyExp(terms)

    def shift_n(self, k: int) -> 'PolyExp':
        """Replace n by n + k."""
        if k == 0:
            return self
        return self.substitute({N: PolyExp.var(N) + k})

    def at_counter(self, k: int) -> 'PolyExp':
        """Fix the counter to the constant k."""
        return self.substitute({N: PolyExp.const(k)})

    # Rendering

    def __str__(self):
        pieces = []
        for mono, base, coeff in self.terms():
            factors = []
            if base != 1:
                factors.append(f'{base}^n' if base > 0 else f'({base})^n')
            if mono:
                factors.append(_mono_str(mono))
            magnitude = abs(coeff)
            if not factors:
                body = _fraction_str(magnitude)
            elif magnitude == 1:
                body = '*'.join(factors)
            else:
                body = '*'.join([_fraction_str(magnitude)] + factors)
            pieces.append(('-' if coeff < 0 else '+', body))
        if not pieces:
            return '0'
        sign, body = pieces[0]
        text = f'-{body}' if sign == '-' else body
        for sign, body in pieces[1:]:
            text += f' {sign} {body}'
        return text


def _exponential_image(base: int, counter_image: Optional[PolyExp]) -> PolyExp:
    if counter_image is None:
        return PolyExp.exp(base)
    if counter_image.is_constant():
        value = counter_image.constant_term()
        if value.denominator != 1:
            raise UnsupportedComposition(f'{base}^n at non-integer counter value {value}')
        return PolyExp.const(Fraction(base) ** value.numerator)
    shift = counter_image - PolyExp.var(N)
    if shift.is_constant() and shift.constant_term().denominator == 1:
        return PolyExp.const(Fraction(base) ** shift.constant_term().numerator) * PolyExp.exp(base)
    raise UnsupportedComposition(f'cannot substitute {counter_image} for n under {base}^n')


def variable(name: str) -> PolyExp:
    return PolyExp.var(Var(name))


class AtomKind(Enum):
    GT0 = '>'
    EQ0 = '='


@dataclass(frozen=True)
class Atom:
    """e > 0 or e = 0."""

    kind: AtomKind
    lhs: PolyExp

    @classmethod
    def gt0(cls, lhs: PolyExp) -> 'Atom':
        return cls(AtomKind.GT0, lhs)

    @classmethod
    def geq0(cls, lhs: PolyExp) -> 'Atom':
        """lhs >= 0 over the integers, i.e. L*lhs + 1 > 0 with L clearing denominators."""
        return cls(AtomKind.GT0, lhs * lhs.denominator_lcm() + 1)

    @classmethod
    def eq0(cls, lhs: PolyExp) -> 'Atom':
        """lhs = 0, normalized so that equal equations compare equal."""
        if lhs:
            if all(c.denominator == 1 for _, _, c in lhs.terms()):
                lhs = lhs * (1 / lhs.content())
            if lhs.leading_sign() < 0:
                lhs = -lhs
        return cls(AtomKind.EQ0, lhs)

    @property
    def is_equation(self) -> bool:
        return self.kind is AtomKind.EQ0

    def holds(self, env: Mapping[Var, int]) -> bool:
        value = self.lhs.value(env)
        return value > 0 if self.kind is AtomKind.GT0 else value == 0

    def substitute(self, sigma: Mapping[Var, PolyExp]) -> 'Atom':
        lhs = self.lhs.substitute(sigma)
        return Atom.eq0(lhs) if self.is_equation else Atom.gt0(lhs)

    def variables(self) -> FrozenSet[Var]:
        return self.lhs.variables()

    def has_exponential(self) -> bool:
        return self.lhs.has_exponential()

    def constant_truth(self) -> Optional[bool]:
        """Truth value when lhs is constant, else None."""
        if not self.lhs.is_constant():
            return None
        value = self.lhs.constant_term()
        return value > 0 if self.kind is AtomKind.GT0 else value == 0

    def integral(self) -> 'Atom':
        """Equivalent atom with integer coefficients."""
        scale = self.lhs.denominator_lcm()
        if scale == 1:
            return self
        return Atom(self.kind, self.lhs * scale)

    def __str__(self):
        if self.kind is AtomKind.GT0:
            return f'{self.lhs} > 0'
        for mono, base, coeff in self.lhs.terms():
            if base != 1 or len(mono) != 1 or mono[0][1] != 1 or abs(coeff) != 1:
                continue
            var = mono[0][0]
            if var.is_primed and var not in (self.lhs - coeff * PolyExp.var(var)).variables():
                rest = self.lhs - coeff * PolyExp.var(var)
                return f'{var} = {-rest if coeff > 0 else rest}'
        return f'{self.lhs} = 0'


FALSE_ATOM = Atom.gt0(PolyExp.const(0))


class Clause:
    """Disjunction of atoms with set semantics; textual order is kept for iteration."""

    __slots__ = ('atoms', '_key')

    def __init__(self, atoms: Iterable[Atom]):
        unique = tuple(dict.fromkeys(atoms))
        if not unique:
            raise ValueError('a clause needs at least one atom')
        self.atoms = unique
        self._key = frozenset(unique)

    def __eq__(self, other):
        if not isinstance(other, Clause):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __iter__(self) -> Iterator[Atom]:
        return iter(self.atoms)

    def __len__(self):
        return len(self.atoms)

    def __repr__(self):
        return f'Clause({self})'

    def __str__(self):
        if len(self.atoms) == 1:
            return str(self.atoms[0])
        return '(' + ' || '.join(str(atom) for atom in self.atoms) + ')'

    def holds(self, env: Mapping[Var, int]) -> bool:
        return any(atom.holds(env) for atom in self.atoms)

    def substitute(self, sigma: Mapping[Var, PolyExp]) -> 'Clause':
        return Clause(atom.substitute(sigma) for atom in self.atoms)

    def variables(self) -> FrozenSet[Var]:
        return frozenset().union(*(atom.variables() for atom in self.atoms))

    def has_exponential(self) -> bool:
        return any(atom.has_exponential() for atom in self.atoms)


class Formula:
    """
    Conjunction of clauses with set semantics; the empty formula is true.

    Clause order is kept because the engines scan clauses in input order.
    """

    __slots__ = ('clauses', '_key')

    def __init__(self, clauses: Iterable[Clause] = ()):
        self.clauses: Tuple[Clause, ...] = tuple(dict.fromkeys(clauses))
        self._key = frozenset(self.clauses)

    @classmethod
    def true(cls) -> 'Formula':
        return cls()

    @classmethod
    def false(cls) -> 'Formula':
        return cls([Clause([FALSE_ATOM])])

    @classmethod
    def of_atoms(cls, atoms: Iterable[Atom]) -> 'Formula':
        return cls(Clause([atom]) for atom in atoms)

    def __eq__(self, other):
        if not isinstance(other, Formula):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)

    def __len__(self):
        return len(self.clauses)

    def __contains__(self, clause):
        return clause in self._key

    def __and__(self, other: 'Formula') -> 'Formula':
        return Formula(self.clauses + other.clauses)

    def __repr__(self):
        return f'Formula({self})'

    def __str__(self):
        if not self.clauses:
            return 'true'
        return ' && '.join(str(clause) for clause in self.clauses)

    @property
    def is_true(self) -> bool:
        return not self.clauses

    def atoms(self) -> Iterator[Atom]:
        for clause in self.clauses:
            yield from clause.atoms

    def without(self, clause: Clause) -> 'Formula':
        return Formula(c for c in self.clauses if c != clause)

    def holds(self, env: Mapping[Var, int]) -> bool:
        return all(clause.holds(env) for clause in self.clauses)

    def substitute(self, sigma: Mapping[Var, PolyExp]) -> 'Formula':
        return Formula(clause.substitute(sigma) for clause in self.clauses)

    def variables(self) -> FrozenSet[Var]:
        return frozenset().union(*(clause.variables() for clause in self.clauses))

    def has_exponential(self) -> bool:
        return any(clause.has_exponential() for clause in self.clauses)

    def mentions_counter(self) -> bool:
        return any(atom.lhs.mentions_counter() for atom in self.atoms())
