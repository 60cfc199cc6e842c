"""Brute-force references and seeded generators used to cross-check the graph and kernel code."""
import itertools
import logging

import numpy as np

from .causal import canonical_dag
from .configuration import DEFAULT_LIMITS, DEFAULT_ORACLE
from .graph import InvalidArgument, MixedGraph, ResourceLimit, names
from .kernel import Kernel, draw_kernel, expand, marginalize, product
from .separation import check_triple, with_fixed_clique

log = logging.getLogger(__name__)

ENUMERATION_NAMES = ('a', 'b', 'c', 'd')


def _generator(seed):
    if seed < 0 or seed >= 2 ** 64:
        raise InvalidArgument(f'Seed {seed} is not a 64-bit unsigned integer.')
    return np.random.default_rng(seed)


def _weights(settings, allow_zeros):
    settings = settings or DEFAULT_ORACLE
    return (0 if allow_zeros else settings.min_weight), settings.max_weight


def random_dag_model(graph, cardinality, seed, settings=None, allow_zeros=False, limits=None):
    """A kernel that factorizes along the DAG, one random conditional per vertex."""
    if not graph.is_dag_shaped():
        raise InvalidArgument('A DAG model needs a graph without bidirected edges.')
    rng = _generator(seed)
    low, high = _weights(settings, allow_zeros)
    factors = []
    for vertex in graph.topological_order():
        if vertex in graph.fixed:
            continue
        parents = [p for p in graph.topological_order() if p in graph.parents({vertex})]
        factors.append(draw_kernel(rng, (vertex,), parents, cardinality, low, high, limits))
    if not factors:
        return Kernel.constant(graph.fixed, cardinality)
    joint = expand(product(*factors), graph.fixed, cardinality)
    order = list(graph.random) + list(graph.fixed)
    return Kernel(graph.random, graph.fixed, joint.cardinality, joint.aligned(order), limits=limits)


def random_kernel(random, fixed, cardinality, seed, settings=None, allow_zeros=False, limits=None):
    """An arbitrary kernel, not constrained by any graph."""
    low, high = _weights(settings, allow_zeros)
    return draw_kernel(_generator(seed), random, fixed, cardinality, low, high, limits)


def margin(p, keep):
    return marginalize(p, keep)


def _check_oracle_size(graph, limits):
    limits = limits or DEFAULT_LIMITS
    if len(graph.vertices) > limits.max_oracle_vertices:
        raise ResourceLimit(f'{len(graph.vertices)} vertices exceed the brute-force cap of '
                            f'{limits.max_oracle_vertices}.')


def _steps(graph, vertex):
    # (next vertex, arrowhead at next, arrowhead at this vertex)
    for child in sorted(graph.children({vertex})):
        yield child, True, False
    for parent in sorted(graph.parents({vertex})):
        yield parent, False, True
    for spouse in sorted(graph.spouses({vertex})):
        yield spouse, True, True


def _paths(graph, start, may_pass):
    """Every simple path from `start` as (end, arrowhead at start, arrowhead at end).

    `may_pass(vertex, into, out)` decides whether a path may continue through an inner vertex,
    given the arrowheads the two path edges put at it.
    """
    stack = [(start, frozenset([start]), None, None)]
    while stack:
        vertex, visited, at_start, into = stack.pop()
        for nxt, arrow_next, arrow_here in _steps(graph, vertex):
            if nxt in visited:
                continue
            if vertex != start and not may_pass(vertex, into, arrow_here):
                continue
            first = arrow_here if vertex == start else at_start
            yield nxt, first, arrow_next
            stack.append((nxt, visited | {nxt}, first, arrow_next))


def brute_force_msep(graph, a, b, c, limits=None):
    """m-separation by listing every simple path of G^{|W}."""
    a, b, c = check_triple(graph, a, b, c)
    _check_oracle_size(graph, limits)
    graph = with_fixed_clique(graph)
    ancestors_of_c = graph.ancestors(c)

    def may_pass(vertex, into, out):
        if into and out:
            return vertex in ancestors_of_c
        return vertex not in c

    for start in sorted(a):
        for end, _, _ in _paths(graph, start, may_pass):
            if end in b:
                return False
    return True


def brute_force_projection(graph, keep, limits=None):
    """Projection read off paths whose inner vertices are all projected out and none is a collider."""
    keep = frozenset(keep)
    _check_oracle_size(graph, limits)
    if set(graph.fixed) - keep:
        raise InvalidArgument('Fixed vertices cannot be projected out.')

    def may_pass(vertex, into, out):
        return vertex not in keep and not (into and out)

    directed, bidirected = set(), set()
    for start in sorted(keep):
        for end, at_start, at_end in _paths(graph, start, may_pass):
            if end not in keep or not at_end:
                continue
            if at_start:
                bidirected.add(tuple(sorted((start, end))))
            else:
                directed.add((start, end))
    return MixedGraph([v for v in graph.random if v in keep], graph.fixed, directed, bidirected)


def enumerate_admgs(n, limits=None):
    """Every labeled ADMG on the first n of a, b, c, d: acyclic directed parts times bidirected parts."""
    limits = limits or DEFAULT_LIMITS
    if n > min(limits.max_enumeration_vertices, len(ENUMERATION_NAMES)):
        raise ResourceLimit(f'Enumerating ADMGs on {n} vertices is over the cap.')
    if n < 1:
        raise InvalidArgument('At least one vertex is needed.')
    vertices = ENUMERATION_NAMES[:n]
    pairs = list(itertools.combinations(vertices, 2))
    count = 0
    for orientation in itertools.product((None, 'forward', 'backward'), repeat=len(pairs)):
        directed = [(x, y) if way == 'forward' else (y, x)
                    for (x, y), way in zip(pairs, orientation) if way]
        try:
            MixedGraph(vertices, directed=directed)
        except InvalidArgument:
            continue
        for chosen in itertools.product((False, True), repeat=len(pairs)):
            count += 1
            yield MixedGraph(vertices, (), directed, [p for p, on in zip(pairs, chosen) if on])
    log.debug(f'Enumerated {count} ADMGs on {n} vertices')


def _shuffled_pairs(rng, vertices):
    order = list(vertices)
    rng.shuffle(order)
    return list(itertools.combinations(order, 2))


def random_admg(n, seed, directed_density=0.5, bidirected_density=0.3):
    rng = _generator(seed)
    vertices = [f'x{i}' for i in range(1, n + 1)]
    directed, bidirected = [], []
    for tail, head in _shuffled_pairs(rng, vertices):
        if rng.random() < directed_density:
            directed.append((tail, head))
        if rng.random() < bidirected_density:
            bidirected.append((tail, head))
    return MixedGraph(vertices, (), directed, bidirected)


def random_latent_dag(n_observed, n_latent, seed, density=0.5):
    """A DAG over x1..xn and latents u1..uk, the latents marked."""
    rng = _generator(seed)
    observed = [f'x{i}' for i in range(1, n_observed + 1)]
    latent = [f'u{i}' for i in range(1, n_latent + 1)]
    directed = [(tail, head) for tail, head in _shuffled_pairs(rng, observed + latent)
                if rng.random() < density]
    return MixedGraph(latent + observed, (), directed, (), latent)


def random_cadmg(n_random, n_fixed, seed, directed_density=0.4, bidirected_density=0.3):
    rng = _generator(seed)
    random = [f'x{i}' for i in range(1, n_random + 1)]
    fixed = [f'w{i}' for i in range(1, n_fixed + 1)]
    directed = [(w, v) for w in fixed for v in random if rng.random() < 0.5]
    bidirected = []
    for tail, head in _shuffled_pairs(rng, random):
        if rng.random() < directed_density:
            directed.append((tail, head))
        if rng.random() < bidirected_density:
            bidirected.append((tail, head))
    return MixedGraph(random, fixed, directed, bidirected)


def canonical_margin(graph, cardinality, seed, settings=None, limits=None):
    """Observed margin of a random model on the graph with one latent per bidirected edge."""
    settings = settings or DEFAULT_ORACLE
    dag = canonical_dag(graph)
    full = dict(cardinality)
    for latent in dag.latent - set(graph.latent):
        full[latent] = settings.latent_cardinality
    missing = set(dag.vertices) - set(full)
    if missing:
        raise InvalidArgument(f'No cardinality for {names(missing)}.')
    p = random_dag_model(dag, full, seed, settings, limits=limits)
    return margin(p, graph.random)
