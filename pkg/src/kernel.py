"""Exact tabular kernels q(x_V | x_W) with rational cells.

Tables are numpy object arrays of `fractions.Fraction`, one axis per variable, random variables
first. A kernel may carry a boolean `defined` mask; cells outside it belong to contexts where a
conditional had a zero denominator and are never read as values.
"""
import functools
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple

import numpy as np

from .configuration import DEFAULT_LIMITS
from .fixing import FixingSequence, NotFixable, fix_graph
from .graph import InvalidArgument, ResourceLimit, check_disjoint, names
from .separation import augmented_separated, m_connected

log = logging.getLogger(__name__)

StateSpace = Dict[str, int]
Assignment = Dict[str, int]

ZERO = Fraction(0)
ONE = Fraction(1)


class DegenerateInput(ValueError):
    pass


def _divide(numerator, denominator):
    if denominator == 0:
        if numerator != 0:
            raise DegenerateInput(f'Positive mass {numerator} divided by a zero conditional.')
        return ZERO
    return Fraction(numerator) / denominator


_safe_divide = np.frompyfunc(_divide, 2, 1)


def _objects(values):
    return np.asarray(values, dtype=object)


class Kernel:
    def __init__(self, random, fixed, cardinality, table, defined=None, limits=None):
        self.random = tuple(random)
        self.fixed = tuple(fixed)
        check_disjoint(self.random, self.fixed)

        missing = [v for v in self.variables if v not in cardinality]
        if missing:
            raise InvalidArgument(f'No cardinality given for {missing}.')
        self.cardinality = {v: int(cardinality[v]) for v in self.variables}
        for vertex, levels in self.cardinality.items():
            if levels < 2:
                raise InvalidArgument(f'{vertex} needs at least two levels, got {levels}.')

        shape = self.shape
        cells = math.prod(shape)
        limit = (limits or DEFAULT_LIMITS).max_cells
        if cells > limit:
            raise ResourceLimit(f'A table with {cells} cells exceeds the cap of {limit}.')

        table = _objects(table)
        if table.shape != shape:
            raise InvalidArgument(f'Table shape {table.shape} does not match {shape}.')
        self.table = table

        if defined is not None:
            defined = np.broadcast_to(np.asarray(defined, dtype=bool), shape).copy()
            if defined.all():
                defined = None
        self.defined = defined

    @property
    def variables(self):
        return self.random + self.fixed

    @property
    def shape(self):
        return tuple(self.cardinality[v] for v in self.variables)

    @classmethod
    def uniform(cls, random, fixed, cardinality):
        random, fixed = tuple(random), tuple(fixed)
        levels = math.prod(cardinality[v] for v in random)
        shape = tuple(cardinality[v] for v in random + fixed)
        return cls(random, fixed, cardinality, np.full(shape, Fraction(1, levels), dtype=object))

    @classmethod
    def constant(cls, fixed, cardinality):
        """The kernel with no random variables: constantly one."""
        fixed = tuple(fixed)
        shape = tuple(cardinality[v] for v in fixed)
        return cls((), fixed, cardinality, np.full(shape, ONE, dtype=object))

    @classmethod
    def from_function(cls, random, fixed, cardinality, function):
        random, fixed = tuple(random), tuple(fixed)
        variables = random + fixed
        shape = tuple(cardinality[v] for v in variables)
        table = np.empty(shape, dtype=object)
        for index in np.ndindex(*shape):
            table[index] = Fraction(function(dict(zip(variables, index))))
        return cls(random, fixed, cardinality, table)

    def _index(self, assignment):
        try:
            index = tuple(assignment[v] for v in self.variables)
        except KeyError as e:
            raise InvalidArgument(f'Assignment misses {e.args[0]!r}.') from None
        for vertex, level in zip(self.variables, index):
            if not 0 <= level < self.cardinality[vertex]:
                raise InvalidArgument(f'Level {level} out of range for {vertex}.')
        return index

    def is_defined(self, assignment):
        return self.defined is None or bool(self.defined[self._index(assignment)])

    def value(self, assignment):
        index = self._index(assignment)
        if self.defined is not None and not self.defined[index]:
            raise DegenerateInput(f'Kernel undefined at {assignment}.')
        return self.table[index]

    def items(self):
        for index in np.ndindex(*self.shape):
            yield dict(zip(self.variables, index)), self.table[index]

    def aligned(self, order):
        return self.table.transpose([self.variables.index(v) for v in order])

    def is_normalized(self):
        axes = tuple(range(len(self.random)))
        totals = np.sum(self.table, axis=axes, keepdims=True) if axes else self.table
        ok = np.broadcast_to(totals == 1, self.shape)
        if self.defined is not None:
            ok = ok | ~self.defined
        return bool(ok.all())

    @property
    def has_undefined(self):
        return self.defined is not None

    def depends_on(self, vertex):
        axis = self.variables.index(vertex)
        moved = np.moveaxis(self.table, axis, 0)
        return not all(bool(np.all(moved[level] == moved[0])) for level in range(1, moved.shape[0]))

    def __eq__(self, other):
        if not isinstance(other, Kernel):
            return NotImplemented
        if set(self.random) != set(other.random) or set(self.fixed) != set(other.fixed):
            return False
        if any(self.cardinality[v] != other.cardinality[v] for v in self.variables):
            return False
        return bool(np.all(self.table == other.aligned(self.variables)))

    __hash__ = None

    def __repr__(self):
        return f'Kernel(random={list(self.random)}, fixed={list(self.fixed)})'


def draw_kernel(rng, random, fixed, cardinality, low=1, high=16, limits=None):
    """A kernel with integer weights drawn from [low, high] normalized per fixed context."""
    random, fixed = tuple(random), tuple(fixed)
    shape = tuple(cardinality[v] for v in random + fixed)
    weights = rng.integers(low, high + 1, size=shape).astype(object)
    axes = tuple(range(len(random)))
    if axes:
        totals = np.sum(weights, axis=axes, keepdims=True)
        for context in zip(*np.nonzero(np.broadcast_to(totals == 0, totals.shape))):
            weights[(0,) * len(axes) + tuple(context[len(axes):])] = 1
        totals = np.sum(weights, axis=axes, keepdims=True)
    else:
        weights = np.ones(shape, dtype=object)
        totals = weights
    table = _objects(_safe_divide(weights, totals))
    return Kernel(random, fixed, cardinality, table, limits=limits)


def _embed(kernel, order):
    """Table and mask of `kernel` reshaped to broadcast against the variables in `order`."""
    present = [v for v in order if v in kernel.cardinality]
    if len(present) != len(kernel.variables):
        raise InvalidArgument(f'{names(set(kernel.variables) - set(order))} missing from {list(order)}.')
    perm = [kernel.variables.index(v) for v in present]
    shape = [kernel.cardinality[v] if v in kernel.cardinality else 1 for v in order]
    table = kernel.table.transpose(perm).reshape(shape)
    mask = None if kernel.defined is None else kernel.defined.transpose(perm).reshape(shape)
    return table, mask


def _random_subset(kernel, vertices, what):
    vertices = frozenset(vertices)
    extra = vertices - set(kernel.random)
    if extra:
        raise InvalidArgument(f'Cannot {what} non-random variables {names(extra)}.')
    return vertices


def marginalize(q, keep):
    """q(x_A | x_W) = Σ_{x_{V\\A}} q(x_V | x_W)."""
    keep = _random_subset(q, keep, 'keep')
    axes = tuple(i for i, v in enumerate(q.random) if v not in keep)
    random = tuple(v for v in q.random if v in keep)
    shape = tuple(q.cardinality[v] for v in random + q.fixed)
    if not axes:
        return q
    table = np.sum(q.table, axis=axes, keepdims=True).reshape(shape)
    defined = None if q.defined is None else q.defined.all(axis=axes, keepdims=True).reshape(shape)
    return Kernel(random, q.fixed, q.cardinality, table, defined)


def condition(q, given):
    """q(x_{V\\A} | x_{W ∪ A}) = q(x_V | x_W) / q(x_A | x_W); zero denominators leave the context undefined."""
    given = _random_subset(q, given, 'condition on')
    if not given:
        return q
    rest = tuple(v for v in q.random if v not in given)
    rest_axes = tuple(q.random.index(v) for v in rest)
    denominator = np.sum(q.table, axis=rest_axes, keepdims=True) if rest_axes else q.table
    ratio = _objects(_safe_divide(q.table, denominator))
    defined = np.broadcast_to(denominator != 0, q.shape)
    if q.defined is not None:
        defined = defined & q.defined

    given_order = tuple(v for v in q.random if v in given)
    order = rest + q.fixed + given_order
    perm = [q.variables.index(v) for v in order]
    return Kernel(rest, q.fixed + given_order, q.cardinality, ratio.transpose(perm),
                  defined.transpose(perm))


def restrict(q, assignment):
    """Slices fixed variables at the given levels."""
    unknown = set(assignment) - set(q.fixed)
    if unknown:
        raise InvalidArgument(f'Only fixed variables can be restricted, not {names(unknown)}.')
    for vertex, level in assignment.items():
        if not 0 <= level < q.cardinality[vertex]:
            raise InvalidArgument(f'Level {level} out of range for {vertex}.')
    index = tuple(assignment[v] if v in assignment else slice(None) for v in q.variables)
    fixed = tuple(v for v in q.fixed if v not in assignment)
    defined = None if q.defined is None else q.defined[index]
    return Kernel(q.random, fixed, q.cardinality, q.table[index].copy(), defined)


def expand(q, fixed, cardinality):
    """Adds fixed variables the kernel does not depend on."""
    extra = tuple(v for v in fixed if v not in q.cardinality)
    if not extra:
        return q
    merged = dict(q.cardinality)
    merged.update({v: cardinality[v] for v in extra})
    order = q.variables + extra
    shape = tuple(merged[v] for v in order)
    table, mask = _embed(q, order)
    mask = None if mask is None else np.broadcast_to(mask, shape)
    return Kernel(q.random, q.fixed + extra, merged, np.broadcast_to(table, shape).copy(), mask)


def product(*kernels):
    """Product of kernels with disjoint random sets; a variable random anywhere is random in the result."""
    if not kernels:
        raise InvalidArgument('The product of no kernels is not defined; use Kernel.constant.')
    check_disjoint(*(k.random for k in kernels))
    cardinality = {}
    for kernel in kernels:
        for vertex, levels in kernel.cardinality.items():
            if cardinality.setdefault(vertex, levels) != levels:
                raise InvalidArgument(f'{vertex} has inconsistent cardinalities.')
    random = tuple(v for k in kernels for v in k.random)
    fixed = tuple(dict.fromkeys(v for k in kernels for v in k.fixed if v not in random))
    order = random + fixed
    shape = tuple(cardinality[v] for v in order)

    table = np.full(shape, ONE, dtype=object)
    mask = None
    for kernel in kernels:
        factor, factor_mask = _embed(kernel, order)
        table = table * factor
        if factor_mask is not None:
            mask = factor_mask if mask is None else mask & factor_mask
    mask = None if mask is None else np.broadcast_to(mask, shape)
    return Kernel(random, fixed, cardinality, _objects(table), mask)


def construct(q, heads, tails):
    """q(x_V | x_W) / q(x_H | x_T, x_W): H moves to the fixed variables.

    Contexts in which the result is not normalized (a zero conditional in a context of positive
    probability) are marked undefined.
    """
    heads = _random_subset(q, heads, 'divide by')
    tails = _random_subset(q, tails, 'condition on')
    check_disjoint(heads, tails)
    local = condition(marginalize(q, heads | tails), tails)
    denominator, _ = _embed(local, q.variables)
    table = _objects(_safe_divide(q.table, denominator))

    random = tuple(v for v in q.random if v not in heads)
    fixed = q.fixed + tuple(v for v in q.random if v in heads)
    perm = [q.variables.index(v) for v in random + fixed]
    table = table.transpose(perm)
    axes = tuple(range(len(random)))
    totals = np.sum(table, axis=axes, keepdims=True) if axes else table
    defined = np.broadcast_to(totals == 1, table.shape)
    if q.defined is not None:
        defined = defined & q.defined.transpose(perm)
    return Kernel(random, fixed, q.cardinality, table, defined)


def _check_pair(q, graph):
    if set(q.random) != set(graph.random) or set(q.fixed) != set(graph.fixed):
        raise InvalidArgument(f'{q!r} does not match the vertices of {graph!r}.')


def _fix(q, vertex, graph):
    fixed_graph = fix_graph(graph, vertex)
    blanket = graph.markov_blanket(vertex) & set(q.random)
    return construct(q, {vertex}, blanket), fixed_graph


def fix_kernel(q, vertex, graph):
    """φ_r(q; G) = q(x_V | x_W) / q(x_r | x_{mb(r)}, x_W)."""
    _check_pair(q, graph)
    kernel, _ = _fix(q, vertex, graph)
    return kernel


def apply_sequence_kernel(p, steps, graph=None):
    """φ_w(p; G) for a valid fixing sequence, tracking the CADMG as it changes."""
    if isinstance(steps, FixingSequence):
        graph = graph or steps.origin
        steps = steps.steps
    if graph is None:
        raise InvalidArgument('A graph is needed to apply a bare list of steps.')
    _check_pair(p, graph)
    q = p
    for position, step in enumerate(steps):
        try:
            q, graph = _fix(q, step, graph)
        except NotFixable as e:
            raise NotFixable(step, e.evidence, position) from None
    return q


@dataclass(frozen=True)
class CiViolation:
    """Two cells sharing x_A and x_C whose conditional values differ."""
    context: Assignment
    first: Assignment
    second: Assignment
    values: Tuple[Fraction, Fraction]
    reason: str = 'unequal'

    def as_dict(self):
        return {
            'reason': self.reason,
            'context': dict(sorted(self.context.items())),
            'first': dict(sorted(self.first.items())),
            'second': dict(sorted(self.second.items())),
            'values': [f'{v.numerator}/{v.denominator}' for v in self.values],
        }


def _clause(q, a, b, c):
    """None when q(x_A | x_B, x_C, x_{W\\(B∪C)}) only depends on x_A and x_C where defined."""
    involved = [v for v in q.random if v in a | b | c]
    conditional = condition(marginalize(q, involved), [v for v in involved if v not in a])
    head = [v for v in conditional.variables if v in a]
    context = [v for v in conditional.variables if v in c]
    others = [v for v in conditional.variables if v not in a and v not in c]

    row_shape = tuple(conditional.cardinality[v] for v in head + context)
    col_shape = tuple(conditional.cardinality[v] for v in others)
    rows, cols = math.prod(row_shape), math.prod(col_shape)
    table = conditional.aligned(head + context + others).reshape(rows, cols)
    if conditional.defined is None:
        mask = np.ones((rows, cols), dtype=bool)
    else:
        perm = [conditional.variables.index(v) for v in head + context + others]
        mask = conditional.defined.transpose(perm).reshape(rows, cols)

    for row in range(rows):
        first = None
        for col in range(cols):
            if not mask[row, col]:
                continue
            if first is None:
                first = col
            elif table[row, col] != table[row, first]:
                shared = dict(zip(head + context, (int(i) for i in np.unravel_index(row, row_shape))))
                return CiViolation(
                    shared,
                    dict(zip(others, (int(i) for i in np.unravel_index(first, col_shape)))),
                    dict(zip(others, (int(i) for i in np.unravel_index(col, col_shape)))),
                    (table[row, first], table[row, col]))
    return None


def find_ci_violation(q, a, b, c) -> Optional[CiViolation]:
    """Evidence against X_A ⫫ X_B | X_C in q, or None when the statement holds."""
    a, b, c = frozenset(a), frozenset(b), frozenset(c)
    check_disjoint(a, b, c)
    unknown = (a | b | c) - set(q.variables)
    if unknown:
        raise InvalidArgument(f'Unknown variables: {names(unknown)}.')
    if not a or not b:
        return None

    fixed = set(q.fixed)
    violation = None
    if not a & fixed:
        violation = _clause(q, a, b, c)
        if violation is None:
            return None
    if not b & fixed:
        return _clause(q, b, a, c)
    if violation is None:
        log.warning(f'Both {names(a)} and {names(b)} contain fixed variables; '
                    'the statement is not decided and counts as failed.')
        violation = CiViolation({}, {}, {}, (ZERO, ZERO), reason='both sides fixed')
    return violation


def kernel_ci(q, a, b, c):
    return find_ci_violation(q, a, b, c) is None


def positions(graph, order=None):
    """Map vertex -> position for a topological order of the random vertices; fixed vertices come first."""
    if order is None:
        order = [v for v in graph.topological_order() if v in set(graph.random)]
    order = list(order)
    if sorted(order) != sorted(graph.random):
        raise InvalidArgument(f'Order {order} is not a permutation of the random vertices.')
    position = {v: -1 for v in graph.fixed}
    position.update({v: i for i, v in enumerate(order)})
    for tail, head in graph.directed:
        if position[tail] >= position[head]:
            raise InvalidArgument(f'Order {order} is not topological: {tail} -> {head}.')
    return position


def _district_factors(q, graph, district, position):
    """[(q(x_d | x_T, x_W), T)] with T = mb(d, an(D) ∩ pre(d))."""
    ancestors = graph.ancestors(district)
    random = set(q.random)
    factors = []
    for vertex in sorted(district, key=position.get):
        prefix = [u for u in ancestors if position[u] <= position[vertex]]
        blanket = graph.induced_subgraph(prefix).markov_blanket(vertex)
        given = blanket & random
        factors.append((condition(marginalize(q, given | {vertex}), given), blanket))
    return factors


def district_kernel(q, graph, district, order=None):
    """q_D(x_D | x_{pa(D)\\D}) as the product of Markov-blanket conditionals."""
    _check_pair(q, graph)
    district = frozenset(district)
    if district not in graph.districts():
        raise InvalidArgument(f'{names(district)} is not a district of the graph.')
    factors = _district_factors(q, graph, district, positions(graph, order))
    return product(*(factor for factor, _ in factors))


def _ancestral_random_parts(graph):
    parts = {frozenset(a) & set(graph.random) for a in graph.ancestral_sets()}
    return sorted((p for p in parts if p), key=lambda p: (len(p), sorted(p)))


def tian_factorization_holds(q, graph, order=None):
    _check_pair(q, graph)
    position = positions(graph, order)
    for part in _ancestral_random_parts(graph):
        sub = graph.induced_subgraph(part | set(graph.fixed))
        factors = []
        for district in sub.districts():
            for factor, blanket in _district_factors(q, graph, district, position):
                if any(factor.depends_on(w) for w in set(graph.fixed) - blanket):
                    return False
                factors.append(factor)
        if marginalize(q, part) != expand(product(*factors), graph.fixed, q.cardinality):
            return False
    return True


def condition_splits(vertices):
    """Every (A, C) of disjoint subsets with A non-empty."""
    vertices = list(vertices)
    for labels in itertools.product((0, 1, 2), repeat=len(vertices)):
        a = frozenset(v for v, label in zip(vertices, labels) if label == 1)
        if a:
            yield a, frozenset(v for v, label in zip(vertices, labels) if label == 2)


@functools.lru_cache(maxsize=32)
def _m_separations(graph):
    """(A, B, C) with B the maximal set m-separated from A given C in G^{|W}."""
    vertices = frozenset(graph.vertices)
    result = []
    for a, c in condition_splits(graph.vertices):
        b = vertices - a - c - m_connected(graph, a, c)
        if b:
            result.append((a, b, c))
    return tuple(result)


@functools.lru_cache(maxsize=32)
def _augmented_separations(graph):
    result = []
    for a, c in condition_splits(graph.vertices):
        b = frozenset(v for v in graph.vertices
                      if v not in a and v not in c and augmented_separated(graph, a, {v}, c))
        if b:
            result.append((a, b, c))
    return tuple(result)


def cadmg_markov(q, graph):
    """Global Markov property: every m-separation of G^{|W} holds in q."""
    _check_pair(q, graph)
    return all(kernel_ci(q, a, b, c) for a, b, c in _m_separations(graph))


def augmented_markov(q, graph):
    _check_pair(q, graph)
    return all(kernel_ci(q, a, b, c) for a, b, c in _augmented_separations(graph))


def ordered_local_markov(q, graph, order=None):
    """Local Markov property at the ≺-last vertex of every ancestral set."""
    _check_pair(q, graph)
    position = positions(graph, order)
    for part in _ancestral_random_parts(graph):
        top = max(part, key=position.get)
        sub = graph.induced_subgraph(part | set(graph.fixed))
        blanket = sub.markov_blanket(top)
        rest = frozenset(sub.vertices) - blanket - {top}
        if rest and not kernel_ci(marginalize(q, part), {top}, rest, blanket):
            return False
    return True
