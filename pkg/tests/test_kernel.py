import logging
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, note, settings, strategies as st

from src.configuration import Limits, OracleSettings
from src.graph import InvalidArgument, MixedGraph, ResourceLimit
from src.kernel import (DegenerateInput, Kernel, apply_sequence_kernel, augmented_markov, cadmg_markov,
                        condition, construct, district_kernel, draw_kernel, expand, find_ci_violation,
                        fix_kernel, kernel_ci, marginalize, ordered_local_markov, positions, product,
                        restrict, tian_factorization_holds)
from src.fixing import NotFixable, reach
from src.oracle import canonical_margin, random_admg, random_cadmg, random_dag_model, random_kernel

BINARY = {v: 2 for v in ('a', 'b', 'c', 'd', 'h', 'r', 'r1', 'r2', 't', 't1', 't2', 'w', 'w1',
                          'x1', 'x2', 'x3', 'x4')}
GENERIC = OracleSettings(max_weight=1000003)


def _draw(seed, random, fixed=()):
    return draw_kernel(np.random.default_rng(seed), random, fixed, BINARY, 1, GENERIC.max_weight)


def _xor():
    return Kernel.from_function(['a', 'b', 'c'], [], BINARY,
                                lambda x: Fraction(1, 4) if x['a'] ^ x['b'] == x['c'] else 0)


def test_marginal_and_conditional_of_independent_coins():
    p = Kernel.uniform(['a', 'b'], [], BINARY)
    assert marginalize(p, {'a'}) == Kernel.uniform(['a'], [], BINARY)
    conditional = condition(p, {'b'})
    assert conditional.random == ('a',)
    assert conditional.fixed == ('b',)
    assert conditional.value({'a': 0, 'b': 1}) == Fraction(1, 2)
    assert conditional.is_normalized()


def test_marginalizing_everything_leaves_the_constant_kernel():
    q = _draw(1, ['a', 'b'], ['w'])
    empty = marginalize(q, set())
    assert empty.random == ()
    assert empty == Kernel.constant(['w'], BINARY)


def test_conditioning_on_a_zero_event_is_undefined():
    p = Kernel.from_function(['a', 'b'], [], BINARY, lambda x: Fraction(x['a'], 2))
    conditional = condition(p, {'a'})
    assert conditional.has_undefined
    assert not conditional.is_defined({'a': 0, 'b': 0})
    assert conditional.value({'a': 1, 'b': 0}) == Fraction(1, 2)
    with pytest.raises(DegenerateInput):
        conditional.value({'a': 0, 'b': 0})
    assert conditional.is_normalized()


def test_restrict_and_expand():
    q = _draw(2, ['a'], ['w'])
    sliced = restrict(q, {'w': 1})
    assert sliced.fixed == ()
    assert sliced.value({'a': 0}) == q.value({'a': 0, 'w': 1})
    widened = expand(sliced, ['w1'], BINARY)
    assert widened.fixed == ('w1',)
    assert not widened.depends_on('w1')
    with pytest.raises(InvalidArgument):
        restrict(q, {'a': 0})
    with pytest.raises(InvalidArgument):
        restrict(q, {'w': 2})
    with pytest.raises(InvalidArgument):
        restrict(q, {'w': -1})


def test_table_size_cap():
    with pytest.raises(ResourceLimit):
        Kernel(['a', 'b', 'c'], [], BINARY, np.full((2, 2, 2), Fraction(1, 8), dtype=object),
               limits=Limits(max_cells=4))


def test_draw_kernel_is_normalized_and_seeded():
    first = _draw(5, ['a', 'b'], ['w'])
    assert first.is_normalized()
    assert first == _draw(5, ['a', 'b'], ['w'])
    assert first != _draw(6, ['a', 'b'], ['w'])


def test_fixing_a_childless_vertex_marginalizes_it(chain):
    p = random_dag_model(chain, BINARY, 3)
    fixed = fix_kernel(p, 'c', chain)
    assert fixed == expand(marginalize(p, {'a', 'b'}), ['c'], BINARY)


def test_fixing_a_non_fixable_vertex_fails(verma):
    p = canonical_margin(verma, BINARY, 4)
    with pytest.raises(NotFixable):
        fix_kernel(p, 'x2', verma)
    with pytest.raises(NotFixable) as error:
        apply_sequence_kernel(p, ['x1', 'x2'], verma)
    assert error.value.position == 1


def test_verma_kernel_is_the_truncated_sum(verma):
    p = canonical_margin(verma, BINARY, 11)
    q = apply_sequence_kernel(p, ['x3', 'x1', 'x2'], verma)
    assert set(q.random) == {'x4'}
    assert set(q.fixed) == {'x1', 'x2', 'x3'}
    assert kernel_ci(q, {'x4'}, {'x1'}, {'x3'})

    outcome = condition(p, {'x1', 'x2', 'x3'})
    treatment = condition(marginalize(p, {'x1', 'x2'}), {'x1'})
    for x1 in range(2):
        for x3 in range(2):
            for x4 in range(2):
                expected = sum(outcome.value({'x1': x1, 'x2': x2, 'x3': x3, 'x4': x4})
                               * treatment.value({'x1': x1, 'x2': x2}) for x2 in range(2))
                assert q.value({'x1': x1, 'x2': 0, 'x3': x3, 'x4': x4}) == expected


def test_xor_is_pairwise_but_not_jointly_independent():
    p = _xor()
    assert kernel_ci(p, {'a'}, {'b'}, set())
    violation = find_ci_violation(p, {'a'}, {'b'}, {'c'})
    assert violation is not None
    assert violation.as_dict()['reason'] == 'unequal'


def test_kernel_that_ignores_its_fixed_variable():
    q = Kernel.from_function(['a'], ['w'], BINARY, lambda x: Fraction(1, 3) if x['a'] else Fraction(2, 3))
    assert kernel_ci(q, {'a'}, {'w'}, set())
    assert kernel_ci(q, {'w'}, {'a'}, set())
    assert not q.depends_on('w')


def test_both_sides_fixed_counts_as_failed(caplog):
    q = Kernel.uniform(['a'], ['w', 'w1'], BINARY)
    with caplog.at_level(logging.WARNING):
        violation = find_ci_violation(q, {'w'}, {'w1'}, set())
    assert violation.reason == 'both sides fixed'
    assert 'fixed variables' in caplog.text


def _member_with_t1_independent_of_t2(seed):
    return product(_draw(seed, ['t1']), _draw(seed + 1, ['t2']), _draw(seed + 2, ['h'], ['t1', 't2']),
                   _draw(seed + 3, ['r'], ['h', 't1', 't2']))


def _member_with_r1_independent_of_h(seed):
    return product(_draw(seed, ['h']), _draw(seed + 1, ['t'], ['h']), _draw(seed + 2, ['r2'], ['h', 't']),
                   _draw(seed + 3, ['r1'], ['t', 'r2']))


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2 ** 32))
def test_construction_keeps_the_pieces_it_is_built_from(seed):
    q = random_kernel(['r', 'h', 't'], ['w'], BINARY, seed, GENERIC)
    built = construct(q, {'h'}, {'t'})
    assert set(built.random) == {'r', 't'}
    assert set(built.fixed) == {'w', 'h'}
    assert built.is_normalized()
    assert condition(built, {'t'}) == condition(q, {'h', 't'})
    assert marginalize(built, {'t'}) == expand(marginalize(q, {'t'}), ['h'], BINARY)
    assert built == product(condition(q, {'h', 't'}), marginalize(q, {'t'}))
    assert kernel_ci(built, {'t'}, {'h'}, {'w'})


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2 ** 30), member=st.booleans())
def test_construction_preserves_statements_about_the_tail(seed, member):
    if member:
        q = _member_with_t1_independent_of_t2(seed)
    else:
        q = random_kernel(['r', 'h', 't1', 't2'], [], BINARY, seed, GENERIC)
    built = construct(q, {'h'}, {'t1', 't2'})
    assert kernel_ci(q, {'t1'}, {'t2'}, set()) == kernel_ci(built, {'t1'}, {'t2'}, set())
    assert kernel_ci(built, {'t1'}, {'t2'}, set()) == member


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2 ** 30), member=st.booleans())
def test_construction_preserves_statements_about_the_rest(seed, member):
    if member:
        q = _member_with_r1_independent_of_h(seed)
    else:
        q = random_kernel(['r1', 'r2', 'h', 't'], [], BINARY, seed, GENERIC)
    built = construct(q, {'h'}, {'t'})
    assert kernel_ci(q, {'r1'}, {'h'}, {'t', 'r2'}) == kernel_ci(built, {'r1'}, {'h'}, {'t', 'r2'})
    assert kernel_ci(built, {'r1'}, {'h'}, {'t', 'r2'}) == member


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2 ** 30))
def test_semi_graphoid_rules(seed):
    q = product(_draw(seed, ['c']), _draw(seed + 1, ['b'], ['c']), _draw(seed + 2, ['d'], ['b', 'c']),
                _draw(seed + 3, ['a'], ['c']))
    assert kernel_ci(q, {'a'}, {'b'}, {'c'})
    assert kernel_ci(q, {'b'}, {'a'}, {'c'})
    assert kernel_ci(q, {'a'}, {'d'}, {'b', 'c'})
    assert kernel_ci(q, {'a'}, {'b', 'd'}, {'c'})
    assert kernel_ci(q, {'a'}, {'d'}, {'c'})
    assert not kernel_ci(q, {'b'}, {'d'}, {'c'})


def test_positions_validate_the_order(verma):
    assert positions(verma) == {'x1': 0, 'x2': 1, 'x3': 2, 'x4': 3}
    with pytest.raises(InvalidArgument):
        positions(verma, ['x2', 'x1', 'x3', 'x4'])
    with pytest.raises(InvalidArgument):
        positions(verma, ['x1', 'x2', 'x3'])


def test_district_kernel_of_verma(verma):
    p = canonical_margin(verma, BINARY, 8)
    kernel = district_kernel(p, verma, {'x2', 'x4'})
    assert set(kernel.random) == {'x2', 'x4'}
    assert set(kernel.fixed) == {'x1', 'x3'}
    assert kernel.is_normalized()
    with pytest.raises(InvalidArgument):
        district_kernel(p, verma, {'x2'})


@pytest.mark.parametrize('seed', range(5))
def test_district_kernel_values_of_verma(verma, seed):
    p = canonical_margin(verma, BINARY, seed)
    kernel = district_kernel(p, verma, {'x2', 'x4'})
    expected = product(condition(marginalize(p, {'x1', 'x2'}), {'x1'}), condition(p, {'x1', 'x2', 'x3'}))
    assert kernel == expected
    fixed = apply_sequence_kernel(p, reach(verma, {'x2', 'x4'}))
    assert fixed == expand(kernel, fixed.fixed, BINARY)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 30), n=st.integers(2, 4))
def test_district_kernels_match_fixed_kernels(seed, n):
    graph = random_admg(n, seed)
    note(repr(graph))
    p = canonical_margin(graph, {v: 2 for v in graph.vertices}, seed)
    for district in graph.districts():
        witness = reach(graph, district)
        if witness is None:
            continue
        fixed = apply_sequence_kernel(p, witness)
        assert fixed == expand(district_kernel(p, graph, district), fixed.fixed, p.cardinality)


def _four_properties(q, graph):
    return (cadmg_markov(q, graph), augmented_markov(q, graph), ordered_local_markov(q, graph),
            tian_factorization_holds(q, graph))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 30), n_random=st.integers(1, 4), n_fixed=st.integers(0, 2))
def test_markov_properties_agree(seed, n_random, n_fixed):
    graph = random_cadmg(n_random, n_fixed, seed)
    note(repr(graph))
    levels = {v: 2 for v in graph.vertices}
    for offset in range(3):
        member = canonical_margin(graph, levels, seed + offset)
        assert _four_properties(member, graph) == (True,) * 4
        arbitrary = random_kernel(graph.random, graph.fixed, levels, seed + offset)
        verdicts = _four_properties(arbitrary, graph)
        note(repr(verdicts))
        assert len(set(verdicts)) == 1


def test_markov_properties_reject_a_kernel_using_a_non_parent():
    graph = MixedGraph(['a'], ['w'])
    q = Kernel.from_function(['a'], ['w'], BINARY, lambda x: Fraction(1, 3) if x['a'] == x['w'] else Fraction(2, 3))
    assert _four_properties(q, graph) == (False,) * 4
