"""The graphical side of fixing: fixable vertices, valid fixing sequences, reachable and intrinsic sets."""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

from .configuration import DEFAULT_LIMITS
from .graph import InvalidArgument, MixedGraph, ResourceLimit, names, set_key

log = logging.getLogger(__name__)


class NotFixable(InvalidArgument):
    def __init__(self, vertex, evidence, position=None):
        self.vertex = vertex
        self.evidence = frozenset(evidence)
        self.position = position
        where = '' if position is None else f' (step {position})'
        super().__init__(f'{vertex} is not fixable{where}: dis ∩ de = {names(self.evidence)}.')


def fixable(graph):
    """{v ∈ V : dis(v) ∩ de(v) = {v}}."""
    return frozenset(v for v in graph.random
                     if graph.district_of(v) & graph.descendants({v}) == {v})


def intervene(graph, vertices):
    """φ*: fixes the vertices whether or not they are fixable.

    Edges with an arrowhead into a fixed vertex are removed and the vertices move to W.
    """
    vertices = frozenset(vertices)
    not_random = vertices - set(graph.random)
    if not_random:
        raise InvalidArgument(f'Only random vertices can be fixed: {names(not_random)}.')
    return MixedGraph([v for v in graph.random if v not in vertices],
                      graph.fixed + tuple(v for v in graph.random if v in vertices),
                      [(t, h) for t, h in graph.directed if h not in vertices],
                      [(a, b) for a, b in graph.bidirected if a not in vertices and b not in vertices],
                      graph.latent - vertices)


def fix_graph(graph, vertex):
    if vertex not in graph.random:
        raise InvalidArgument(f'{vertex!r} is not a random vertex of the graph.')
    evidence = graph.district_of(vertex) & graph.descendants({vertex})
    if evidence != {vertex}:
        raise NotFixable(vertex, evidence)
    return intervene(graph, {vertex})


def apply_sequence(graph, steps):
    """φ_w(G) for a valid sequence; the first invalid step is reported with its position."""
    for position, step in enumerate(steps):
        try:
            graph = fix_graph(graph, step)
        except NotFixable as e:
            raise NotFixable(step, e.evidence, position) from None
    return graph


@dataclass(frozen=True)
class FixingSequence:
    steps: Tuple[str, ...]
    origin: MixedGraph = field(compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, 'steps', tuple(self.steps))

    @classmethod
    def checked(cls, origin, steps):
        sequence = cls(tuple(steps), origin)
        sequence.graph  # raises NotFixable on the first invalid step
        return sequence

    @classmethod
    def reached(cls, origin, steps, graph):
        """A sequence whose resulting graph is already known."""
        sequence = cls(tuple(steps), origin)
        sequence.__dict__["graph"] = graph
        return sequence

    @cached_property
    def graph(self):
        return apply_sequence(self.origin, self.steps)

    @property
    def fixed_set(self):
        return frozenset(self.steps)

    def extend(self, steps):
        return FixingSequence(self.steps + tuple(steps), self.origin)

    def __len__(self):
        return len(self.steps)


@dataclass(frozen=True)
class ReachableSet:
    remaining: frozenset
    witness: FixingSequence

    @property
    def graph(self):
        return self.witness.graph


@dataclass(frozen=True)
class IntrinsicSet:
    members: frozenset
    witness: FixingSequence

    @property
    def graph(self):
        return self.witness.graph


def _greedy(graph, remaining):
    steps = []
    while True:
        todo = set(graph.random) - remaining
        if not todo:
            return graph, steps
        candidates = sorted(fixable(graph) & todo)
        if not candidates:
            return None, steps
        steps.append(candidates[0])
        graph = fix_graph(graph, candidates[0])


def reach(graph, remaining) -> Optional[FixingSequence]:
    """Greedily fixes the name-least fixable vertex outside R; never needs to backtrack."""
    remaining = frozenset(remaining)
    if not remaining <= set(graph.random):
        raise InvalidArgument(f'Not random vertices: {names(remaining - set(graph.random))}.')
    reached, steps = _greedy(graph, remaining)
    if reached is None:
        return None
    return FixingSequence.reached(graph, steps, reached)


def check_size(graph, limits):
    limits = limits or DEFAULT_LIMITS
    if len(graph.random) > limits.max_vertices:
        raise ResourceLimit(f'{len(graph.random)} random vertices exceed the enumeration cap of '
                            f'{limits.max_vertices}.')


def reachable_sets(graph, limits=None):
    """Every non-empty reachable R ⊆ V with one witness, memoized on the remaining set."""
    check_size(graph, limits)
    log.debug(f'Enumerating reachable sets of {len(graph.random)} random vertices...')

    found = {frozenset(graph.random): (graph, ())}
    stack = [(graph, ())]
    while stack:
        current, steps = stack.pop()
        for vertex in sorted(fixable(current), reverse=True):
            remaining = frozenset(current.random) - {vertex}
            if not remaining or remaining in found:
                continue
            reached = fix_graph(current, vertex)
            found[remaining] = (reached, steps + (vertex,))
            stack.append((reached, steps + (vertex,)))

    result = []
    for remaining, (reached, steps) in found.items():
        result.append(ReachableSet(remaining, FixingSequence.reached(graph, steps, reached)))
    result.sort(key=lambda r: set_key(r.remaining))
    log.debug(f'Found {len(result)} reachable sets')
    return result


def intrinsic_sets(graph, limits=None):
    """Districts of every reachable CADMG, each witnessed by the greedy sequence reaching it."""
    members = set()
    for reachable in reachable_sets(graph, limits):
        members.update(reachable.graph.districts())

    result = []
    for district in sorted(members, key=set_key):
        witness = reach(graph, district)
        result.append(IntrinsicSet(district, witness))
    return result
