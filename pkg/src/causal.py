"""Identification of p(x_Y | do(x_A)) in ADMGs by fixing.

An effect is identified when every district of G_{Y*}, Y* = an_{G_{V\\A}}(Y), is intrinsic. The
identifying functional is built twice: numerically, as the product of the fixed kernels of those
districts, and symbolically, as an expression over conditionals of the observed distribution.
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Tuple, Union

from .fixing import FixingSequence, apply_sequence, intervene, intrinsic_sets, reach
from .graph import InvalidArgument, MixedGraph, names, set_key
from .kernel import (DegenerateInput, Kernel, apply_sequence_kernel, condition, expand, marginalize,
                     product, restrict)
from .projection import ProjectionRequest, latent_project

log = logging.getLogger(__name__)

PRIME = '′'


class Term:
    """p(x_head | x_given) of the observed joint."""

    def __init__(self, head, given=()):
        self.head = tuple(head)
        self.given = tuple(given)

    def variables(self):
        return frozenset(self.head) | frozenset(self.given)

    def render(self, taken, renaming):
        head = ','.join(renaming.get(v, v) for v in self.head)
        if not self.given:
            return f'p({head})'
        return f'p({head}|{",".join(renaming.get(v, v) for v in self.given)})'

    def evaluate(self, p, values, cache):
        key = (self.head, self.given)
        if key not in cache:
            cache[key] = condition(marginalize(p, set(self.head) | set(self.given)), self.given)
        return cache[key].value({v: values[v] for v in self.head + self.given})

    def __repr__(self):
        return f'Term({self.head}, {self.given})'


class Product:
    def __init__(self, factors):
        self.factors = tuple(factors)

    def variables(self):
        return frozenset().union(*(f.variables() for f in self.factors))

    def render(self, taken, renaming):
        if not self.factors:
            return '1'
        text = ''
        for factor in self.factors:
            rendered = factor.render(taken, renaming)
            if isinstance(factor, Sum) and text:
                text += ' '
            text += rendered
        return text

    def evaluate(self, p, values, cache):
        result = 1
        for factor in self.factors:
            result = result * factor.evaluate(p, values, cache)
        return result

    def __repr__(self):
        return f'Product({list(self.factors)})'


class Sum:
    def __init__(self, over, body):
        self.over = tuple(over)
        self.body = body

    def variables(self):
        return self.body.variables() - frozenset(self.over)

    def render(self, taken, renaming):
        taken = set(taken)
        renaming = dict(renaming)
        shown = []
        for vertex in self.over:
            name = vertex
            while name in taken:
                name += PRIME
            renaming[vertex] = name
            taken.add(name)
            shown.append(name)
        return f'Σ_{{{",".join(shown)}}} {self.body.render(taken, renaming)}'

    def evaluate(self, p, values, cache):
        total = 0
        levels = [range(p.cardinality[v]) for v in self.over]
        for assignment in itertools.product(*levels):
            inner = dict(values)
            inner.update(zip(self.over, assignment))
            total = total + self.body.evaluate(p, inner, cache)
        return total

    def __repr__(self):
        return f'Sum({self.over}, {self.body!r})'


class Ratio:
    def __init__(self, numerator, denominator):
        self.numerator = numerator
        self.denominator = denominator

    def variables(self):
        return self.numerator.variables() | self.denominator.variables()

    def render(self, taken, renaming):
        return f'({self.numerator.render(taken, renaming)})/({self.denominator.render(taken, renaming)})'

    def evaluate(self, p, values, cache):
        denominator = self.denominator.evaluate(p, values, cache)
        if denominator == 0:
            raise DegenerateInput(f'Zero denominator in {self.render(frozenset(), {})}.')
        return self.numerator.evaluate(p, values, cache) / denominator


Expression = Union[Term, Product, Sum, Ratio]


def render(expression):
    return expression.render(expression.variables(), {})


def evaluate(expression, p, values):
    """Exact value of the expression at `values` (levels of its free variables)."""
    missing = expression.variables() - set(values)
    if missing:
        raise InvalidArgument(f'No level given for {names(missing)}.')
    return expression.evaluate(p, values, {})


def _sum_out(factors, over, position):
    """Σ_over Π factors, dropping conditionals that sum to one and pulling out the rest."""
    factors = list(factors)
    over = sorted(over, key=position.get, reverse=True)
    changed = True
    while changed:
        changed = False
        for vertex in list(over):
            mentioning = [f for f in factors if vertex in f.variables()]
            if not mentioning:
                over.remove(vertex)
                changed = True
            elif (len(mentioning) == 1 and isinstance(mentioning[0], Term)
                  and mentioning[0].head == (vertex,)):
                factors.remove(mentioning[0])
                over.remove(vertex)
                changed = True
    if not over:
        return factors
    inside = [f for f in factors if f.variables() & set(over)]
    outside = [f for f in factors if not f.variables() & set(over)]
    return outside + [Sum(over, Product(inside))]


def _conditional(factors, vertex, later, position):
    """q(x_vertex | x_earlier, x_W) of the kernel Π factors."""
    numerator = _sum_out(factors, later, position)
    mentioning = [f for f in numerator if vertex in f.variables()]
    if len(mentioning) == 1 and isinstance(mentioning[0], Term) and mentioning[0].head == (vertex,):
        return mentioning[0]
    return Ratio(Product(numerator), Product(_sum_out(numerator, {vertex}, position)))


def _fix_all(graph, vertices, position):
    return apply_sequence(graph, sorted(vertices, key=position.get, reverse=True))


def district_functional(graph, district, position):
    """Factors of q_D as conditionals of p, for an intrinsic D of the ADMG."""
    top = graph.district_of(next(iter(district)))
    ancestors = graph.ancestors(top)
    factors = []
    for vertex in sorted(top, key=position.get, reverse=True):
        prefix = [u for u in ancestors if position[u] <= position[vertex]]
        blanket = graph.induced_subgraph(prefix).markov_blanket(vertex)
        factors.append(Term((vertex,), sorted(blanket, key=position.get, reverse=True)))

    current = reach(graph, top).graph
    random = frozenset(top)
    while random != district:
        relevant = current.ancestors(district) & random
        if relevant != random:
            factors = _sum_out(factors, random - relevant, position)
            current = _fix_all(current, random - relevant, position)
            random = relevant
            continue
        inner = current.district_of(next(iter(district)))
        if inner == random:
            raise InvalidArgument(f'{names(district)} is not intrinsic.')
        order = sorted(random, key=position.get)
        refactored = []
        for vertex in sorted(inner, key=position.get, reverse=True):
            later = set(order[order.index(vertex) + 1:])
            refactored.append(_conditional(factors, vertex, later, position))
        factors = refactored
        current = reach(current, inner).graph
        random = inner
    return factors


@dataclass(frozen=True)
class CausalQuery:
    treatment: frozenset
    outcome: frozenset

    def __post_init__(self):
        object.__setattr__(self, 'treatment', frozenset(self.treatment))
        object.__setattr__(self, 'outcome', frozenset(self.outcome))
        if not self.outcome:
            raise InvalidArgument('The outcome must not be empty.')
        overlap = self.treatment & self.outcome
        if overlap:
            raise InvalidArgument(f'Treatment and outcome overlap on {names(overlap)}.')

    def check(self, graph):
        if graph.fixed:
            raise InvalidArgument('Identification needs an ADMG without fixed vertices.')
        unknown = (self.treatment | self.outcome) - set(graph.random)
        if unknown:
            raise InvalidArgument(f'Unknown vertices in the query: {names(unknown)}.')

    def as_dict(self):
        return {'treatment': names(self.treatment), 'outcome': names(self.outcome)}


@dataclass(frozen=True)
class Identifiable:
    query: CausalQuery
    y_star: frozenset
    factors: Tuple[Tuple[frozenset, FixingSequence], ...]
    sum_over: frozenset
    functional: Expression

    identifiable = True

    def render(self):
        return render(self.functional)

    def as_dict(self):
        return {
            'identifiable': True,
            'query': self.query.as_dict(),
            'y_star': names(self.y_star),
            'sum_over': names(self.sum_over),
            'districts': [{'district': names(d), 'witness': list(w.steps)} for d, w in self.factors],
            'functional': self.render(),
        }


@dataclass(frozen=True)
class NotIdentifiable:
    query: CausalQuery
    y_star: frozenset
    offending_district: frozenset
    minimal_intrinsic_superset: frozenset

    identifiable = False

    def as_dict(self):
        return {
            'identifiable': False,
            'query': self.query.as_dict(),
            'y_star': names(self.y_star),
            'offending_district': names(self.offending_district),
            'minimal_intrinsic_superset': names(self.minimal_intrinsic_superset),
        }


def outcome_ancestors(graph, query):
    """Y* = an_{G_{V\\A}}(Y)."""
    return graph.induced_subgraph(set(graph.vertices) - query.treatment).ancestors(query.outcome)


def _average_out(factors, allowed, position):
    """Averages district factors over the observed margin of their variables outside `allowed`.

    A district kernel of the model does not depend on those fixed variables, so weighting them
    by p leaves its value unchanged and keeps the functional a function of x_A and x_Y.
    """
    stray = frozenset().union(*(f.variables() for f in factors)) - allowed
    if not stray:
        return factors
    over = sorted(stray, key=position.get)
    log.debug(f'Averaging a district factor over {names(stray)}')
    return [Sum(over, Product([Term(over)] + list(factors)))]


def identify(graph, query, limits=None):
    query.check(graph)
    y_star = outcome_ancestors(graph, query)
    districts = graph.induced_subgraph(y_star).districts()
    position = {v: i for i, v in enumerate(graph.topological_order())}

    factors = []
    for district in districts:
        witness = reach(graph, district)
        if witness is None:
            candidates = [s.members for s in intrinsic_sets(graph, limits) if district <= s.members]
            superset = min(candidates, key=set_key)
            log.info(f'{names(district)} is not intrinsic; smallest intrinsic superset '
                     f'{names(superset)}')
            return NotIdentifiable(query, y_star, district, superset)
        factors.append((district, witness))

    factors.sort(key=lambda item: min(position[v] for v in item[0]))
    allowed = y_star | query.treatment
    terms = []
    for district, _ in factors:
        terms.extend(_average_out(district_functional(graph, district, position), allowed, position))
    sum_over = y_star - query.outcome
    functional = _sum_out(terms, sum_over, position)
    functional = functional[0] if len(functional) == 1 else Product(functional)
    return Identifiable(query, y_star, tuple(factors), sum_over, functional)


def evaluate_effect(graph, p, query, assignment=None, result=None):
    """p(x_Y | do(x_A)) as a kernel with Y random and A fixed, or restricted to `assignment`.

    Each district kernel is averaged over the observed margin of its fixed vertices that are not
    parents of the district. Kernels of model members do not depend on them; for a distribution
    outside the model the result is this particular average.
    """
    result = result or identify(graph, query)
    if not result.identifiable:
        raise InvalidArgument(f'The effect of {names(query.treatment)} on {names(query.outcome)} '
                              f'is not identifiable.')

    kernels = []
    for district, witness in result.factors:
        kernel = apply_sequence_kernel(p, witness)
        parents = graph.parents(district)
        others = [v for v in kernel.fixed if v not in parents]
        if others:
            kernel = marginalize(product(kernel, marginalize(p, others)), district)
        kernels.append(kernel)
    effect = marginalize(product(*kernels), query.outcome)
    effect = expand(effect, sorted(query.treatment), p.cardinality)
    if assignment is not None:
        extra = set(assignment) - query.treatment
        if extra:
            raise InvalidArgument(f'Treatment levels given for non-treatment vertices {names(extra)}.')
        effect = restrict(effect, assignment)
    return effect


def g_formula(graph, p, treatment):
    """Π_{v ∈ V\\A} p(x_v | x_pa(v)) with the treatment fixed."""
    if not graph.is_dag_shaped():
        raise InvalidArgument('The g-formula needs a graph without bidirected edges.')
    treatment = frozenset(treatment)
    unknown = treatment - set(graph.random)
    if unknown:
        raise InvalidArgument(f'Unknown treatment vertices: {names(unknown)}.')
    fixed = sorted(treatment) + list(graph.fixed)
    factors = []
    for vertex in graph.random:
        if vertex in treatment:
            continue
        parents = graph.parents({vertex}) & set(p.random)
        factors.append(condition(marginalize(p, parents | {vertex}), parents))
    if not factors:
        return Kernel.constant(fixed, p.cardinality)
    return expand(product(*factors), fixed, p.cardinality)


def canonical_dag(graph):
    """Replaces each bidirected edge a <-> b by a fresh latent u_a_b with u_a_b -> a, u_a_b -> b."""
    taken = set(graph.vertices)
    latents, directed = [], list(graph.directed)
    for a, b in sorted(graph.bidirected):
        name = f'u_{a}_{b}'
        while name in taken:
            name += '_'
        taken.add(name)
        latents.append(name)
        directed += [(name, a), (name, b)]
    return MixedGraph(latents + list(graph.random), graph.fixed, directed, (),
                      set(graph.latent) | set(latents))


def truncate_to_relevant(graph, treatment, outcome):
    """A_Y = an_{G_Ā}(Y) ∩ A: the treatments with a directed path to Y avoiding other treatments."""
    treatment, outcome = frozenset(treatment), frozenset(outcome)
    if treatment & outcome:
        raise InvalidArgument(f'Treatment and outcome overlap on {names(treatment & outcome)}.')
    return intervene(graph, treatment).ancestors(outcome) & treatment


def projection_invariance(first, second, query):
    """Whether two latent DAGs give the same verdict and functional for the query."""
    results = [identify(latent_project(ProjectionRequest.from_latent_mark(g)), query)
               for g in (first, second)]
    if results[0].identifiable != results[1].identifiable:
        return False
    if not results[0].identifiable:
        return results[0].offending_district == results[1].offending_district
    return results[0].render() == results[1].render()
