"""Conditional acyclic directed mixed graphs (CADMGs) and their genealogical queries."""
import itertools
import logging
import re

import networkx as nx

log = logging.getLogger(__name__)

_VERTEX_NAME = re.compile(r'^[A-Za-z0-9_]+$')


class InvalidArgument(ValueError):
    pass


class ResourceLimit(RuntimeError):
    pass


def names(vertices):
    """Returns the vertices as a name-sorted list, the canonical form of every set-valued result."""
    return sorted(vertices)


def set_key(vertices):
    return (len(vertices), tuple(sorted(vertices)))


def sorted_sets(sets):
    return sorted((frozenset(s) for s in sets), key=set_key)


def check_disjoint(*sets):
    seen = set()
    for s in sets:
        overlap = seen & set(s)
        if overlap:
            raise InvalidArgument(f'Vertex sets overlap on {names(overlap)}.')
        seen |= set(s)


class MixedGraph:
    """A CADMG with random vertices V, fixed vertices W, directed and bidirected edges.

    An ADMG is the case without fixed vertices. Instances are immutable: every operation returns
    a new graph. Vertex order is the insertion order; set-valued queries return frozensets.
    """

    def __init__(self, random, fixed=(), directed=(), bidirected=(), latent=()):
        self._random = tuple(random)
        self._fixed = tuple(fixed)
        vertices = self._random + self._fixed

        for vertex in vertices:
            if not isinstance(vertex, str) or not _VERTEX_NAME.match(vertex):
                raise InvalidArgument(f'Invalid vertex name: {vertex!r}.')
        if len(set(vertices)) != len(vertices):
            duplicates = sorted(v for v in set(vertices) if vertices.count(v) > 1)
            raise InvalidArgument(f'Vertices declared more than once: {duplicates}.')

        known = set(vertices)
        fixed_set = set(self._fixed)

        directed_edges = set()
        for tail, head in directed:
            self._check_endpoints(known, tail, head)
            if head in fixed_set:
                raise InvalidArgument(f'Directed edge {tail} -> {head} points into fixed vertex {head}.')
            directed_edges.add((tail, head))

        bidirected_edges = set()
        for a, b in bidirected:
            self._check_endpoints(known, a, b)
            if a in fixed_set or b in fixed_set:
                raise InvalidArgument(f'Bidirected edge {a} <-> {b} touches a fixed vertex.')
            bidirected_edges.add(tuple(sorted((a, b))))

        latent = frozenset(latent)
        if not latent <= set(self._random):
            raise InvalidArgument(f'Latent vertices must be random: {names(latent - set(self._random))}.')

        self._directed = frozenset(directed_edges)
        self._bidirected = frozenset(bidirected_edges)
        self._latent = latent

        self._dag = nx.DiGraph()
        self._dag.add_nodes_from(vertices)
        self._dag.add_edges_from(self._directed)
        if not nx.is_directed_acyclic_graph(self._dag):
            cycle = ' -> '.join(tail for tail, _ in nx.find_cycle(self._dag))
            raise InvalidArgument(f'Directed cycle through {cycle}.')

        self._bidi = nx.Graph()
        self._bidi.add_nodes_from(self._random)
        self._bidi.add_edges_from(self._bidirected)

        self._districts = None
        self._order = None

    @staticmethod
    def _check_endpoints(known, a, b):
        for vertex in (a, b):
            if vertex not in known:
                raise InvalidArgument(f'Edge {a} - {b} uses undeclared vertex {vertex!r}.')
        if a == b:
            raise InvalidArgument(f'Self-loop at {a}.')

    @property
    def random(self):
        return self._random

    @property
    def fixed(self):
        return self._fixed

    @property
    def vertices(self):
        return self._random + self._fixed

    @property
    def directed(self):
        return self._directed

    @property
    def bidirected(self):
        return self._bidirected

    @property
    def latent(self):
        return self._latent

    @property
    def observed(self):
        return frozenset(self._random) - self._latent

    def is_dag_shaped(self):
        return not self._bidirected

    def _check(self, vertices):
        vertices = frozenset(vertices)
        unknown = vertices - set(self._dag)
        if unknown:
            raise InvalidArgument(f'Unknown vertices: {names(unknown)}.')
        return vertices

    def replace(self, random=None, fixed=None, directed=None, bidirected=None, latent=None):
        return MixedGraph(self._random if random is None else random,
                          self._fixed if fixed is None else fixed,
                          self._directed if directed is None else directed,
                          self._bidirected if bidirected is None else bidirected,
                          self._latent if latent is None else latent)

    def with_latent(self, latent):
        return self.replace(latent=latent)

    def parents(self, vertices):
        vertices = self._check(vertices)
        return frozenset(p for v in vertices for p in self._dag.predecessors(v))

    def children(self, vertices):
        vertices = self._check(vertices)
        return frozenset(c for v in vertices for c in self._dag.successors(v))

    def spouses(self, vertices):
        vertices = self._check(vertices)
        return frozenset(s for v in vertices if v in self._bidi for s in self._bidi.neighbors(v))

    def ancestors(self, vertices):
        vertices = self._check(vertices)
        result = set(vertices)
        for v in vertices:
            result |= nx.ancestors(self._dag, v)
        return frozenset(result)

    def descendants(self, vertices):
        vertices = self._check(vertices)
        result = set(vertices)
        for v in vertices:
            result |= nx.descendants(self._dag, v)
        return frozenset(result)

    def non_descendants(self, vertices):
        return frozenset(self._dag) - self.descendants(vertices)

    def is_ancestral(self, vertices):
        vertices = self._check(vertices)
        return self.ancestors(vertices) == vertices

    def topological_order(self):
        """Topological order of V ∪ W with ties broken by vertex name."""
        if self._order is None:
            self._order = tuple(nx.lexicographical_topological_sort(self._dag))
        return self._order

    def districts(self):
        """Bidirected-connected components of the random vertices, in canonical order."""
        if self._districts is None:
            self._districts = tuple(sorted_sets(nx.connected_components(self._bidi)))
        return self._districts

    def district_of(self, vertex):
        if vertex not in self._bidi:
            raise InvalidArgument(f'{vertex!r} is not a random vertex.')
        return frozenset(nx.node_connected_component(self._bidi, vertex))

    def markov_blanket(self, vertex):
        """pa(dis(t)) ∪ (dis(t) \\ {t}) computed in this graph."""
        district = self.district_of(vertex)
        return (self.parents(district) | district) - {vertex}

    def induced_subgraph(self, vertices):
        vertices = self._check(vertices)
        return MixedGraph([v for v in self._random if v in vertices],
                          [v for v in self._fixed if v in vertices],
                          [(t, h) for t, h in self._directed if t in vertices and h in vertices],
                          [(a, b) for a, b in self._bidirected if a in vertices and b in vertices],
                          self._latent & vertices)

    def ancestral_sets(self):
        """Every ancestral subset of V ∪ W, smallest first."""
        result = []
        vertices = self.topological_order()
        for size in range(len(vertices) + 1):
            for subset in itertools.combinations(vertices, size):
                if self.is_ancestral(subset):
                    result.append(frozenset(subset))
        return result

    def __eq__(self, other):
        if not isinstance(other, MixedGraph):
            return NotImplemented
        return (set(self._random) == set(other._random)
                and set(self._fixed) == set(other._fixed)
                and self._directed == other._directed
                and self._bidirected == other._bidirected)

    def __hash__(self):
        return hash((frozenset(self._random), frozenset(self._fixed), self._directed, self._bidirected))

    def __repr__(self):
        edges = [f'{t}->{h}' for t, h in sorted(self._directed)]
        edges += [f'{a}<->{b}' for a, b in sorted(self._bidirected)]
        return f'MixedGraph(random={list(self._random)}, fixed={list(self._fixed)}, edges={edges})'
