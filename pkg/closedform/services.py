"""
Closed-form recurrence solving for triangular updates.

A triangular update has the shape x_i := c_i * x_i + p_i where p_i only
mentions variables solved before x_i. Unrolling gives

    x_i(n) = c_i^n * x_i + sum_{k=0}^{n-1} c_i^(n-1-k) * p_i(x(k))

and the sum is computed exactly by summing poly-exponential terms.
"""
import logging
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Tuple

import sympy as sp
from sympy.utilities.iterables import strongly_connected_components, topological_sort

from expr.models import N, PolyExp, Var
from loopaccel.exceptions import NonTriangular, UnsupportedRecurrence
from loops.models import Loop

from .models import ClosedForm

logger = logging.getLogger(__name__)

_k = sp.Symbol('k', integer=True)
_n = sp.Symbol('n', integer=True)


def _to_fraction(value) -> Fraction:
    value = sp.Rational(value)
    return Fraction(int(value.p), int(value.q))


@lru_cache(maxsize=None)
def _faulhaber(power: int) -> Tuple[Fraction, ...]:
    """Coefficients (constant first) of sum_{k=0}^{n-1} k^power as a polynomial in n."""
    total = sp.expand(sp.summation(_k ** power, (_k, 0, _n - 1)))
    poly = sp.Poly(total, _n)
    return tuple(_to_fraction(c) for c in reversed(poly.all_coeffs()))


@lru_cache(maxsize=None)
def _ansatz_inverse(ratio: Fraction, degree: int) -> Tuple[Tuple[Fraction, ...], ...]:
    """
    Inverse of the linear system for r in r(n+1)*ratio - r(n) = q(n).

    Row i collects the coefficient of n^i; the system is upper triangular with
    diagonal ratio - 1, hence regular for ratio != 1.
    """
    rho = sp.Rational(ratio.numerator, ratio.denominator)
    size = degree + 1
    matrix = sp.Matrix(size, size, lambda i, j: rho * sp.binomial(j, i) - (1 if i == j else 0) if j >= i else 0)
    inverse = matrix.inv()
    return tuple(tuple(_to_fraction(inverse[i, j]) for j in range(size)) for i in range(size))


def _index_coefficients(q: PolyExp) -> List[PolyExp]:
    """Coefficients of q as a polynomial in the summation index, constant first."""
    if q.has_exponential():
        raise UnsupportedRecurrence(f'summand {q} must be polynomial in the index')
    groups = q.collect(N)
    degree = max(groups, default=0)
    return [groups.get(i, PolyExp()) for i in range(degree + 1)]


def _power_sum(q: PolyExp) -> PolyExp:
    """sum_{k=0}^{n-1} q(k) for q polynomial in the index."""
    result = PolyExp()
    for power, coeff in enumerate(_index_coefficients(q)):
        if not coeff:
            continue
        faulhaber = PolyExp()
        for i, c in enumerate(_faulhaber(power)):
            faulhaber = faulhaber + c * PolyExp.var(N) ** i
        result = result + coeff * faulhaber
    return result


def _geometric_parts(q: PolyExp, ratio: Fraction) -> Tuple[PolyExp, PolyExp]:
    """
    Solve sum_{k=0}^{n-1} q(k) * ratio^k = r(n) * ratio^n + s for ratio != 1.

    Returns (r, s); r is polynomial in n with the degree of q, s does not mention n.
    """
    coeffs = _index_coefficients(q)
    inverse = _ansatz_inverse(ratio, len(coeffs) - 1)
    r = PolyExp()
    for j, row in enumerate(inverse):
        r_j = PolyExp()
        for entry, q_i in zip(row, coeffs):
            if entry and q_i:
                r_j = r_j + entry * q_i
        r = r + r_j * PolyExp.var(N) ** j
    s = -r.at_counter(0)

    # Self-check at n = 0 .. deg + 2
    partial = PolyExp()
    for m in range(len(coeffs) + 2):
        if r.at_counter(m) * ratio ** m + s != partial:
            raise RuntimeError(f'summation check failed for {q} with ratio {ratio} at n={m}')
        partial = partial + q.at_counter(m) * ratio ** m
    return r, s


def sum_polyexp(q: PolyExp, base: int) -> PolyExp:
    """
    Closed form of sum_{k=0}^{n-1} q(k) * base^k, valid for all n >= 0.

    The summation index is written as the counter n inside q, so q is a
    polynomial in n whose coefficients may mention program variables.

    Args:
        q: Summand, polynomial in the index
        base: Nonzero integer

    Returns:
        Expression over the program variables and n
    """
    if base == 0:
        raise ValueError('base must be nonzero')
    if base == 1:
        return _power_sum(q)
    r, s = _geometric_parts(q, Fraction(base))
    return r.times_exp(base) + s


def _unrolled_sum(summand: PolyExp, c: int) -> PolyExp:
    """sum_{k=0}^{n-1} c^(n-1-k) * summand(k) for a poly-exponential summand."""
    result = PolyExp()
    for base, part in summand.by_base().items():
        if base == c:
            result = result + _power_sum(part).times_exp(c) / c
        else:
            r, s = _geometric_parts(part, Fraction(base, c))
            result = result + (r.times_exp(base) + s.times_exp(c)) / c
    return result


def _solve_order(loop: Loop, dependencies: Dict[Var, frozenset]) -> List[Var]:
    """Topological order of the dependency graph, ties broken by declaration order."""
    position = {var: i for i, var in enumerate(loop.variables)}
    edges = [(dep, var) for var in loop.variables for dep in sorted(dependencies[var], key=position.get)]
    try:
        return topological_sort((list(loop.variables), edges), key=position.get)
    except ValueError:
        for component in strongly_connected_components((list(loop.variables), edges)):
            if len(component) > 1:
                raise NonTriangular([v.name for v in sorted(component, key=position.get)]) from None
        raise


def solve_closed_form(loop: Loop) -> ClosedForm:
    """
    Compute the closed form of a triangular update.

    Raises:
        NonTriangular: The dependency graph has a cycle through distinct variables
        UnsupportedRecurrence: A variable's update leaves the supported fragment
    """
    linear: Dict[Var, int] = {}
    rests: Dict[Var, PolyExp] = {}
    for var, rhs in loop.update.assignments:
        c = rhs.linear_coefficient(var)
        rest = rhs - c * PolyExp.var(var)
        if var in rest.variables():
            raise UnsupportedRecurrence(f'{var} occurs non-linearly in its own update {rhs}')
        linear[var] = int(c)
        rests[var] = rest

    order = _solve_order(loop, {var: rests[var].variables() for var in loop.variables})
    logger.debug(f"Solving closed form in order {[str(v) for v in order]}")

    solved: Dict[Var, PolyExp] = {}
    valid: Dict[Var, int] = {}
    for var in order:
        c = linear[var]
        start = max((valid[dep] for dep in rests[var].variables() if dep in valid), default=0)
        summand = rests[var].substitute(solved)
        if c == 0:
            # x(n) = p(x(n-1)), known once n - 1 reaches the start of p
            solved[var] = summand.shift_n(-1)
            valid[var] = start + 1
        elif start == 0:
            solved[var] = PolyExp.var(var).times_exp(c) + _unrolled_sum(summand, c)
            valid[var] = 0
        else:
            # Unroll from x(start) = a^start(x)_i, then shift back
            initial = loop.update.power(start)[var]
            tail = initial.times_exp(c) + _unrolled_sum(summand.shift_n(start), c)
            solved[var] = tail.shift_n(-start)
            valid[var] = start

    valid_from = max(valid.values(), default=0)
    if valid_from:
        logger.info(f"Closed form of {loop.variables} valid from n = {valid_from}")
    return ClosedForm(loop.variables, tuple(solved[var] for var in loop.variables), valid_from)
