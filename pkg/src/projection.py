import itertools
import logging
from dataclasses import dataclass

from .fixing import intervene
from .graph import InvalidArgument, MixedGraph, names

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProjectionRequest:
    """Project `graph` onto `keep`; every random vertex outside `keep` is latent."""
    graph: MixedGraph
    keep: frozenset

    def __post_init__(self):
        keep = frozenset(self.keep)
        object.__setattr__(self, 'keep', keep)
        unknown = keep - set(self.graph.vertices)
        if unknown:
            raise InvalidArgument(f'Unknown vertices: {names(unknown)}.')
        dropped_fixed = set(self.graph.fixed) - keep
        if dropped_fixed:
            raise InvalidArgument(f'Fixed vertices cannot be projected out: {names(dropped_fixed)}.')

    @classmethod
    def from_latent_mark(cls, graph):
        return cls(graph, frozenset(graph.vertices) - graph.latent)

    @property
    def latent(self):
        return frozenset(self.graph.random) - self.keep


def latent_project(request):
    """Eliminates latents one at a time.

    For a latent l with In = {a : a → l}, Bi = {a : a ↔ l} and Out = {b : l → b}, the
    elimination adds a → b for a ∈ In, b ∈ Out, a ↔ b for a ∈ Bi, b ∈ Out and a ↔ b for
    distinct a, b ∈ Out, then deletes l.
    """
    graph = request.graph
    directed = set(graph.directed)
    bidirected = set(graph.bidirected)

    for latent in sorted(request.latent):
        incoming = {t for t, h in directed if h == latent}
        outgoing = {h for t, h in directed if t == latent}
        spouses = {a if b == latent else b for a, b in bidirected if latent in (a, b)}

        directed |= {(a, b) for a in incoming for b in outgoing}
        bidirected |= {tuple(sorted((a, b))) for a in spouses for b in outgoing if a != b}
        bidirected |= {tuple(sorted(pair)) for pair in itertools.combinations(outgoing, 2)}

        directed = {(t, h) for t, h in directed if latent not in (t, h)}
        bidirected = {(a, b) for a, b in bidirected if latent not in (a, b)}

    log.debug(f'Projected out {names(request.latent)}')
    return MixedGraph([v for v in graph.random if v in request.keep], graph.fixed,
                      directed, bidirected)


def project(graph, keep):
    return latent_project(ProjectionRequest(graph, frozenset(keep)))


def projection_commutes_with_fixing_check(graph, vertex):
    """Whether projecting out the latents and fixing `vertex` with φ* commute on this CADG."""
    if not graph.is_dag_shaped():
        raise InvalidArgument('Fixing/projection commutation is stated for graphs without bidirected edges.')
    if vertex in graph.latent or vertex not in graph.random:
        raise InvalidArgument(f'{vertex!r} must be an observed random vertex.')

    keep = frozenset(graph.vertices) - graph.latent
    fixed_then_projected = project(intervene(graph, {vertex}), keep)
    projected_then_fixed = intervene(project(graph, keep), {vertex})
    return fixed_then_projected == projected_then_fixed
