import itertools
from fractions import Fraction

import pytest
from hypothesis import given, note, settings, strategies as st

from src.causal import (CausalQuery, canonical_dag, evaluate, evaluate_effect, g_formula, identify,
                        projection_invariance, truncate_to_relevant)
from src.graph import InvalidArgument, MixedGraph
from src.kernel import Kernel, expand, marginalize, restrict
from src.oracle import canonical_margin, enumerate_admgs, margin, random_admg, random_dag_model, random_kernel

VERMA_FUNCTIONAL = 'Σ_{x3,x1} p(x1)p(x3|x2,x1) Σ_{x2′} p(x4|x3,x2′,x1)p(x2′|x1)'


def _levels(graph):
    return {v: 2 for v in graph.vertices}


def test_verma_effect_is_identified(verma):
    result = identify(verma, CausalQuery({'x2'}, {'x4'}))
    assert result.identifiable
    assert result.y_star == {'x1', 'x3', 'x4'}
    assert [d for d, _ in result.factors] == [{'x1'}, {'x3'}, {'x4'}]
    assert result.render() == VERMA_FUNCTIONAL
    assert result.as_dict()['districts'][2] == {'district': ['x4'], 'witness': ['x1', 'x3', 'x2']}


def test_bow_is_not_identified(bow):
    result = identify(bow, CausalQuery({'a'}, {'y'}))
    assert not result.identifiable
    assert result.offending_district == {'y'}
    assert result.minimal_intrinsic_superset == {'a', 'y'}
    assert result.as_dict()['minimal_intrinsic_superset'] == ['a', 'y']


def test_front_door_is_identified(front_door):
    result = identify(front_door, CausalQuery({'a'}, {'y'}))
    assert result.identifiable
    assert result.y_star == {'m', 'y'}


@pytest.mark.parametrize('treatment, outcome', [
    (set(), set()),
    ({'x1'}, {'x1'}),
])
def test_malformed_queries(treatment, outcome):
    with pytest.raises(InvalidArgument):
        CausalQuery(treatment, outcome)


def test_query_on_unknown_vertices(verma):
    with pytest.raises(InvalidArgument):
        identify(verma, CausalQuery({'x9'}, {'x4'}))


def test_effect_agrees_with_the_latent_model(verma, verma_latent):
    full = random_dag_model(verma_latent, _levels(verma_latent), 17)
    p = margin(full, verma.random)
    query = CausalQuery({'x2'}, {'x4'})
    effect = evaluate_effect(verma, p, query)
    assert effect == marginalize(g_formula(verma_latent, full, {'x2'}), {'x4'})
    assert effect.is_normalized()


def test_symbolic_and_numeric_effects_agree(verma):
    p = canonical_margin(verma, _levels(verma), 3)
    query = CausalQuery({'x2'}, {'x4'})
    result = identify(verma, query)
    effect = evaluate_effect(verma, p, query, result=result)
    for x2 in range(2):
        for x4 in range(2):
            assert evaluate(result.functional, p, {'x2': x2, 'x4': x4}) == effect.value({'x2': x2, 'x4': x4})


def test_effect_at_a_treatment_level(verma):
    p = canonical_margin(verma, _levels(verma), 3)
    query = CausalQuery({'x2'}, {'x4'})
    at_one = evaluate_effect(verma, p, query, {'x2': 1})
    assert at_one.fixed == ()
    assert at_one == restrict(evaluate_effect(verma, p, query), {'x2': 1})
    with pytest.raises(InvalidArgument):
        evaluate_effect(verma, p, query, {'x1': 1})


def test_no_treatment_gives_the_marginal(verma):
    p = canonical_margin(verma, _levels(verma), 6)
    effect = evaluate_effect(verma, p, CausalQuery(set(), {'x4'}))
    assert effect == marginalize(p, {'x4'})


def test_evaluating_an_unidentified_effect_fails(bow):
    p = canonical_margin(bow, _levels(bow), 1)
    with pytest.raises(InvalidArgument):
        evaluate_effect(bow, p, CausalQuery({'a'}, {'y'}))


def test_g_formula(chain):
    p = random_dag_model(chain, _levels(chain), 4)
    assert g_formula(chain, p, set()) == p
    assert g_formula(chain, p, {'a', 'b', 'c'}) == Kernel.constant(['a', 'b', 'c'], _levels(chain))
    with pytest.raises(InvalidArgument):
        g_formula(chain.replace(bidirected=[('a', 'b')]), p, set())


def test_irrelevant_treatments_can_be_dropped(chain):
    p = random_dag_model(chain, _levels(chain), 12)
    assert truncate_to_relevant(chain, {'a', 'b'}, {'c'}) == {'b'}
    both = evaluate_effect(chain, p, CausalQuery({'a', 'b'}, {'c'}), {'a': 0})
    reduced = evaluate_effect(chain, p, CausalQuery({'b'}, {'c'}))
    assert both == reduced


def test_relevant_treatments():
    graph = MixedGraph(['a', 'y', 'z'], directed=[('a', 'z')])
    assert truncate_to_relevant(graph, {'a'}, {'y'}) == frozenset()


def test_canonical_dag():
    graph = MixedGraph(['a', 'b'], bidirected=[('a', 'b')])
    dag = canonical_dag(graph)
    assert dag.latent == {'u_a_b'}
    assert dag.directed == {('u_a_b', 'a'), ('u_a_b', 'b')}
    assert dag.is_dag_shaped()
    chain = MixedGraph(['a', 'b'], directed=[('a', 'b')])
    assert canonical_dag(chain) == chain


def test_projection_invariance(verma_latent):
    other = MixedGraph(['u1', 'u2', 'x1', 'x2', 'x3', 'x4'],
                       directed=[('u1', 'x2'), ('u1', 'u2'), ('u2', 'x4'), ('x1', 'x2'), ('x1', 'x3'),
                                 ('x2', 'x3'), ('x3', 'x4')],
                       latent=['u1', 'u2'])
    assert projection_invariance(verma_latent, other, CausalQuery({'x2'}, {'x4'}))
    assert projection_invariance(verma_latent, other, CausalQuery({'x3'}, {'x4'}))


def test_effect_of_a_certain_treatment_is_a_certain_outcome():
    graph = MixedGraph(['a', 'y'], directed=[('a', 'y')])
    levels = _levels(graph)
    p = Kernel.from_function(['a', 'y'], [], levels, lambda x: Fraction(1, 2) if x['a'] == x['y'] else 0)
    effect = evaluate_effect(graph, p, CausalQuery({'a'}, {'y'}))
    assert effect.value({'a': 1, 'y': 1}) == 1
    assert effect.value({'a': 0, 'y': 1}) == 0


def test_functional_averages_over_non_parent_fixed_vertices():
    graph = MixedGraph(['a', 'b', 'c'], directed=[('a', 'b')], bidirected=[('b', 'c')])
    query = CausalQuery({'b'}, {'c'})
    result = identify(graph, query)
    assert result.identifiable
    assert result.functional.variables() == {'c'}
    assert result.render() == 'Σ_{a} p(a) Σ_{b} p(c|b,a)p(b|a)'

    p = random_kernel(graph.random, (), _levels(graph), 5)
    effect = evaluate_effect(graph, p, query, result=result)
    assert effect == expand(marginalize(p, {'c'}), ['b'], p.cardinality)
    for b, c in itertools.product(range(2), repeat=2):
        assert evaluate(result.functional, p, {'b': b, 'c': c}) == effect.value({'b': b, 'c': c})


def _queries(graph):
    for a, y in itertools.permutations(graph.vertices, 2):
        yield CausalQuery({a}, {y})
    for treatment in itertools.combinations(graph.vertices, len(graph.vertices) - 1):
        outcome = set(graph.vertices) - set(treatment)
        yield CausalQuery(set(treatment), outcome)


def _check_functionals(graph, seed):
    p = canonical_margin(graph, _levels(graph), seed)
    for query in _queries(graph):
        result = identify(graph, query)
        if not result.identifiable:
            continue
        free = query.treatment | query.outcome
        assert result.functional.variables() <= free, (graph, query, result.render())
        effect = evaluate_effect(graph, p, query, result=result)
        order = sorted(free)
        for levels in itertools.product(range(2), repeat=len(order)):
            values = dict(zip(order, levels))
            assert evaluate(result.functional, p, values) == effect.value(values), (graph, query)


def test_functionals_on_every_three_vertex_admg():
    for index, graph in enumerate(enumerate_admgs(3)):
        _check_functionals(graph, index)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32))
def test_functionals_on_four_vertex_admgs(seed):
    graph = random_admg(4, seed)
    note(repr(graph))
    _check_functionals(graph, seed)


def test_treatment_levels_must_be_in_range(verma):
    p = canonical_margin(verma, _levels(verma), 3)
    with pytest.raises(InvalidArgument):
        evaluate_effect(verma, p, CausalQuery({'x2'}, {'x4'}), {'x2': 5})
