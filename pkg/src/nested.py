"""The nested Markov model: constraint enumeration and membership checking."""
import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .configuration import DEFAULT_SAMPLES
from .fixing import FixingSequence, check_size, intrinsic_sets, reach, reachable_sets
from .graph import InvalidArgument, check_disjoint, names
from .kernel import (CiViolation, DegenerateInput, apply_sequence_kernel, condition_splits,
                     draw_kernel, find_ci_violation, positions, product)
from .separation import m_connected

log = logging.getLogger(__name__)

MODES = ('global', 'local', 'tian')

PASS = 'pass'
FAIL = 'fail'
DEGENERATE = 'degenerate'


def _join(vertices):
    return ','.join(names(vertices))


@dataclass(frozen=True)
class CiConstraint:
    """X_a ⫫ X_b | X_c in the kernel φ_S(p), S = fixed_set, reached through `witness`."""
    fixed_set: frozenset
    witness: FixingSequence = field(compare=False, repr=False)
    a: frozenset
    b: frozenset
    c: frozenset

    def __post_init__(self):
        for name in ('fixed_set', 'a', 'b', 'c'):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        check_disjoint(self.a, self.b, self.c)
        if not self.a or not self.b:
            raise InvalidArgument('Both sides of a constraint must be non-empty.')
        if self.witness.fixed_set != self.fixed_set:
            raise InvalidArgument(f'Witness fixes {names(self.witness.fixed_set)}, '
                                  f'not {names(self.fixed_set)}.')

    @property
    def identity(self):
        return self.fixed_set, frozenset((self.a, self.b)), self.c

    def key(self):
        return (len(self.fixed_set), names(self.fixed_set), names(self.a), names(self.b),
                names(self.c))

    def oriented(self):
        """The same constraint with the name-smaller side first."""
        if names(self.b) < names(self.a):
            return CiConstraint(self.fixed_set, self.witness, self.b, self.a, self.c)
        return self

    @property
    def statement(self):
        text = f'{_join(self.a)} ⫫ {_join(self.b)}'
        if self.c:
            text += f' | {_join(self.c)}'
        if self.fixed_set:
            text += f' [fix {_join(self.fixed_set)}]'
        return text

    def as_dict(self):
        return {
            'statement': self.statement,
            'fixed': names(self.fixed_set),
            'witness': list(self.witness.steps),
            'a': names(self.a),
            'b': names(self.b),
            'c': names(self.c),
        }

    def __str__(self):
        return self.statement


@dataclass
class ConstraintReport:
    mode: str
    constraints: List[CiConstraint]
    verdicts: List[str]
    violations: List[Tuple[CiConstraint, CiViolation]] = field(default_factory=list)

    @property
    def holds(self):
        return FAIL not in self.verdicts

    def as_dict(self):
        violations = {c.identity: v for c, v in self.violations}
        entries = []
        for constraint, verdict in zip(self.constraints, self.verdicts):
            entry = constraint.as_dict()
            entry['verdict'] = verdict
            if constraint.identity in violations:
                entry['violation'] = violations[constraint.identity].as_dict()
            entries.append(entry)
        return {
            'mode': self.mode,
            'holds': self.holds,
            'counts': {verdict: self.verdicts.count(verdict) for verdict in (PASS, FAIL, DEGENERATE)},
            'constraints': entries,
        }


def canonical(constraints):
    unique = {}
    for constraint in constraints:
        unique.setdefault(constraint.identity, constraint)
    return sorted(unique.values(), key=CiConstraint.key)


class _KernelCache:
    """φ_S(p) for each fixed set S, computed once per witness."""

    def __init__(self, p):
        self.p = p
        self.kernels = {}

    def get(self, constraint):
        if constraint.fixed_set not in self.kernels:
            try:
                self.kernels[constraint.fixed_set] = apply_sequence_kernel(self.p, constraint.witness)
            except DegenerateInput as e:
                log.debug(f'Fixing {list(constraint.witness.steps)} is degenerate: {e}')
                self.kernels[constraint.fixed_set] = e
        return self.kernels[constraint.fixed_set]


def _verdict(cache, constraint):
    kernel = cache.get(constraint)
    if isinstance(kernel, DegenerateInput):
        return DEGENERATE, None
    try:
        violation = find_ci_violation(kernel, constraint.a, constraint.b, constraint.c)
    except DegenerateInput:
        return DEGENERATE, None
    if violation is not None:
        return FAIL, violation
    if kernel.has_undefined:
        return DEGENERATE, None
    return PASS, None


def evaluate_constraints(p, constraints, mode=''):
    """Checks every constraint on the kernels actually computed from p."""
    cache = _KernelCache(p)
    verdicts, violations = [], []
    log.info(f'Checking {len(constraints)} constraints')
    for constraint in constraints:
        verdict, violation = _verdict(cache, constraint)
        verdicts.append(verdict)
        if violation is not None:
            log.debug(f'Violated: {constraint.statement}')
            violations.append((constraint, violation))
    return ConstraintReport(mode, list(constraints), verdicts, violations)


def _sample_kernels(graph, cardinality, samples):
    samples = samples or DEFAULT_SAMPLES
    cardinality = cardinality or {v: 2 for v in graph.vertices}
    return [_KernelCache(draw_kernel(np.random.default_rng(samples.seed + i), graph.random,
                                     graph.fixed, cardinality, 1, samples.max_weight))
            for i in range(samples.count)]


def _non_trivial(candidates, samples):
    """Drops the candidates that hold on every generic sample distribution.

    The test is probabilistic: a candidate the graph does not imply is only dropped when it holds
    exactly on each seeded sample by accident, which the large random weights make negligible.
    """
    kept = []
    for constraint in candidates:
        if any(_verdict(cache, constraint)[0] != PASS for cache in samples):
            kept.append(constraint)
    log.debug(f'{len(kept)} of {len(candidates)} candidates are non-trivial')
    return kept


def global_nested_constraints(graph, cardinality=None, samples=None, limits=None):
    """For each reachable R, the maximal m-separations X_A ⫫ X_B | X_C of φ_{V\\R}(G)^{|W}."""
    candidates = []
    for reachable in reachable_sets(graph, limits):
        reached = reachable.graph
        vertices = frozenset(reached.vertices)
        for a, c in condition_splits(reached.vertices):
            b = vertices - a - c - m_connected(reached, a, c)
            if b:
                candidates.append(CiConstraint(reachable.witness.fixed_set, reachable.witness,
                                               a, b, c).oriented())
    candidates = canonical(candidates)
    return _non_trivial(candidates, _sample_kernels(graph, cardinality, samples))


def ordered_local_nested_constraints(graph, order=None, cardinality=None, samples=None, limits=None):
    """For each intrinsic C, the local statement at its ≺-last vertex in φ_{V\\C}(G)."""
    position = positions(graph, order)
    candidates = []
    for intrinsic in intrinsic_sets(graph, limits):
        reached = intrinsic.graph
        top = max(intrinsic.members, key=position.get)
        blanket = reached.markov_blanket(top)
        rest = frozenset(reached.vertices) - blanket - {top}
        if rest:
            candidates.append(CiConstraint(intrinsic.witness.fixed_set, intrinsic.witness,
                                           {top}, rest, blanket))
    candidates = canonical(candidates)
    return _non_trivial(candidates, _sample_kernels(graph, cardinality, samples))


def _follow(witness, steps, reached=None):
    if reached is None:
        return witness.extend(steps)
    return FixingSequence.reached(witness.origin, witness.steps + tuple(steps), reached)


def node_constraints(vertex, witness):
    """Constraints attached to a childless `vertex` in the CADMG reached by `witness`.

    For every non-empty descendant-closed D of the random vertices with vertex ∉ D, the kernel
    after fixing D yields the statement on D' = S \\ D and, when fixing D splits S into several
    districts, a blanket statement at `vertex`; the search recurses into the district of `vertex`.
    """
    graph = witness.graph
    random = frozenset(graph.random)
    order = [v for v in graph.topological_order() if v in random]
    if vertex not in random or graph.children({vertex}) & random:
        raise InvalidArgument(f'{vertex!r} must be a childless random vertex.')

    found = []
    others = [v for v in order if v != vertex]
    outer_parents = graph.parents(random) - random
    for size in range(1, len(others) + 1):
        for chosen in itertools.combinations(others, size):
            chosen = frozenset(chosen)
            if not graph.descendants(chosen) & random <= chosen:
                continue
            rest = random - chosen
            fixed_chosen = _follow(witness, sorted(chosen, key=order.index, reverse=True))
            reduced = fixed_chosen.graph

            rest_parents = graph.parents(rest)
            dropped = outer_parents - rest_parents
            if dropped:
                found.append(CiConstraint(fixed_chosen.fixed_set, fixed_chosen, rest, dropped,
                                          rest_parents - rest))

            if len(reduced.districts()) > 1:
                blanket = reduced.markov_blanket(vertex)
                beyond = (rest | rest_parents) - blanket - {vertex}
                if beyond:
                    found.append(CiConstraint(fixed_chosen.fixed_set, fixed_chosen, {vertex},
                                              beyond, blanket))

            district = reduced.district_of(vertex)
            inner = reach(reduced, district)
            found.extend(node_constraints(
                vertex, _follow(fixed_chosen, inner.steps, inner.graph)))
    return found


def tian_constraints(graph, order=None, cardinality=None, samples=None, limits=None):
    """Constraints found by walking the vertices in ≺ order over their prefixes."""
    position = positions(graph, order)
    order = sorted(graph.random, key=position.get)
    check_size(graph, limits)
    candidates = []
    for index, vertex in enumerate(order):
        prefix = frozenset(order[:index + 1])
        suffix = list(reversed(order[index + 1:]))
        witness = FixingSequence.checked(graph, suffix)
        reached = witness.graph

        blanket = reached.markov_blanket(vertex)
        rest = (prefix | set(graph.fixed)) - blanket - {vertex}
        if rest:
            candidates.append(CiConstraint(witness.fixed_set, witness, {vertex}, rest, blanket))

        district = reached.district_of(vertex)
        inner = reach(reached, district)
        candidates.extend(node_constraints(vertex, _follow(witness, inner.steps, inner.graph)))
    candidates = canonical(candidates)
    return _non_trivial(candidates, _sample_kernels(graph, cardinality, samples))


def nested_constraints(graph, mode='global', order=None, cardinality=None, samples=None, limits=None):
    if mode == 'global':
        if order is not None:
            positions(graph, order)
        return global_nested_constraints(graph, cardinality, samples, limits)
    if mode == 'local':
        return ordered_local_nested_constraints(graph, order, cardinality, samples, limits)
    if mode == 'tian':
        return tian_constraints(graph, order, cardinality, samples, limits)
    raise InvalidArgument(f'Unknown mode {mode!r}; expected one of {", ".join(MODES)}.')


def _check_joint(graph, p):
    if set(p.random) != set(graph.random) or set(p.fixed) != set(graph.fixed):
        raise InvalidArgument(f'{p!r} does not match the vertices of {graph!r}.')


def check_membership(graph, p, mode='global', order=None, samples=None, limits=None):
    _check_joint(graph, p)
    log.info(f'Enumerating {mode} constraints...')
    constraints = nested_constraints(graph, mode, order, p.cardinality, samples, limits)
    return evaluate_constraints(p, constraints, mode)


def nested_factorization_holds(graph, p, limits=None):
    """φ_{V\\R}(p) = Π_D φ_{V\\D}(p) over the districts D of φ_{V\\R}(G), for every reachable R.

    Each factor may only depend on the parents of its district.
    """
    _check_joint(graph, p)
    for reachable in reachable_sets(graph, limits):
        kernel = apply_sequence_kernel(p, reachable.witness)
        factors = []
        for district in reachable.graph.districts():
            factor = apply_sequence_kernel(p, reach(graph, district))
            parents = graph.parents(district)
            if any(factor.depends_on(w) for w in factor.fixed if w not in parents):
                log.debug(f'The kernel of {names(district)} depends on a non-parent')
                return False
            factors.append(factor)
        if kernel != product(*factors):
            log.debug(f'Factorization fails on {names(reachable.remaining)}')
            return False
    return True


def fixing_order_invariant(graph, p, first, second):
    """Whether two valid sequences fixing the same set give the same kernel from p."""
    first = FixingSequence.checked(graph, first)
    second = FixingSequence.checked(graph, second)
    if first.fixed_set != second.fixed_set:
        raise InvalidArgument('Both sequences must fix the same vertices.')
    return apply_sequence_kernel(p, first) == apply_sequence_kernel(p, second)
