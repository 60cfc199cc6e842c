import itertools
import logging

import networkx as nx

from .graph import InvalidArgument, MixedGraph, check_disjoint

log = logging.getLogger(__name__)

# The augmented graph is a plain networkx graph.
UndirectedGraph = nx.Graph


def with_fixed_clique(graph):
    """G^{|W}: joins every pair of fixed vertices by a bidirected edge and makes them random."""
    if not graph.fixed:
        return graph
    clique = itertools.combinations(graph.fixed, 2)
    return MixedGraph(graph.vertices, (), graph.directed, set(graph.bidirected) | set(clique),
                      graph.latent)


def check_triple(graph, a, b, c):
    a, b, c = frozenset(a), frozenset(b), frozenset(c)
    check_disjoint(a, b, c)
    unknown = (a | b | c) - set(graph.vertices)
    if unknown:
        raise InvalidArgument(f'Unknown vertices: {sorted(unknown)}.')
    if not a or not b:
        raise InvalidArgument('Both sides of a separation statement must be non-empty.')
    return a, b, c


def augment(graph):
    """Undirected graph joining every pair of vertices connected by a collider path in G^{|W}.

    Collider paths run through a single district, so each district together with its parents
    becomes a clique.
    """
    graph = with_fixed_clique(graph)
    augmented = nx.Graph()
    augmented.add_nodes_from(graph.vertices)
    for district in graph.districts():
        members = sorted(district | graph.parents(district))
        augmented.add_edges_from(itertools.combinations(members, 2))
    return augmented


def u_separated(augmented, a, b, c):
    a, b, c = frozenset(a), frozenset(b), frozenset(c)
    check_disjoint(a, b, c)
    remaining = augmented.subgraph(set(augmented) - c)
    reached = set()
    for vertex in a:
        if vertex not in reached:
            reached |= nx.node_connected_component(remaining, vertex)
    return not (reached & b)


def augmented_separated(graph, a, b, c):
    a, b, c = check_triple(graph, a, b, c)
    relevant = graph.induced_subgraph(graph.ancestors(a | b | c))
    return u_separated(augment(relevant), a, b, c)


def m_separated(graph, a, b, c):
    """Whether A and B are m-separated given C, evaluated in G^{|W} through the augmented graph."""
    return augmented_separated(graph, a, b, c)


def d_separated(graph, a, b, c):
    if not graph.is_dag_shaped():
        raise InvalidArgument('d-separation needs a graph without bidirected edges.')
    return m_separated(graph, a, b, c)


def m_connected(graph, a, c):
    """Every vertex outside A ∪ C that is m-connected to some vertex of A given C in G^{|W}.

    The sweep walks (vertex, arrived-with-arrowhead) states: a vertex entered through an
    arrowhead may continue through another arrowhead only when it is an ancestor of C, and any
    other continuation requires the vertex to be outside C.
    """
    a, c = frozenset(a), frozenset(c)
    check_disjoint(a, c)
    graph = with_fixed_clique(graph)
    ancestors_of_c = graph.ancestors(c)

    def steps(vertex):
        # (next vertex, arrowhead at next vertex, arrowhead at this vertex)
        for child in graph.children({vertex}):
            yield child, True, False
        for parent in graph.parents({vertex}):
            yield parent, False, True
        for spouse in graph.spouses({vertex}):
            yield spouse, True, True

    stack = []
    for start in a:
        for nxt, arrow_next, _ in steps(start):
            stack.append((nxt, arrow_next))
    visited = set(stack)
    reached = set()
    while stack:
        vertex, into = stack.pop()
        if vertex not in c:
            reached.add(vertex)
        for nxt, arrow_next, arrow_here in steps(vertex):
            collider = into and arrow_here
            if collider and vertex not in ancestors_of_c:
                continue
            if not collider and vertex in c:
                continue
            state = (nxt, arrow_next)
            if state not in visited:
                visited.add(state)
                stack.append(state)
    return frozenset(reached - a - c)
