import pytest

from src.configuration import OracleSettings
from src.fixing import FixingSequence, reach
from src.graph import InvalidArgument, MixedGraph
from src.kernel import Kernel, apply_sequence_kernel
from src.nested import (FAIL, PASS, CiConstraint, check_membership, evaluate_constraints,
                        fixing_order_invariant, global_nested_constraints, nested_constraints,
                        nested_factorization_holds, node_constraints, ordered_local_nested_constraints,
                        tian_constraints)
from src.oracle import canonical_margin, random_kernel

GENERIC = OracleSettings(max_weight=1000003)


def _statements(constraints):
    return [c.statement for c in constraints]


def _complete(n):
    vertices = ['a', 'b', 'c', 'd'][:n]
    pairs = [(x, y) for i, x in enumerate(vertices) for y in vertices[i + 1:]]
    return MixedGraph(vertices, directed=pairs, bidirected=pairs)


def test_verma_constraint_is_found_in_every_kernel_it_shows_up_in(verma):
    statements = _statements(global_nested_constraints(verma))
    assert 'x1 ⫫ x4 | x3 [fix x3]' in statements
    assert 'x1 ⫫ x4 | x3 [fix x1,x2,x3]' in statements


def test_ordered_local_statement_at_the_last_vertex(verma):
    statements = _statements(ordered_local_nested_constraints(verma))
    assert 'x4 ⫫ x1,x2 | x3 [fix x1,x2,x3]' in statements


def test_tian_constraints_find_the_verma_constraint(verma):
    statements = _statements(tian_constraints(verma))
    assert 'x4 ⫫ x1 | x3 [fix x1,x2,x3]' in statements


def test_chain_constraints(chain):
    assert _statements(ordered_local_nested_constraints(chain)) == ['c ⫫ a | b [fix a,b]']
    assert _statements(tian_constraints(chain)) == ['c ⫫ a | b']
    assert 'a ⫫ c | b' in _statements(global_nested_constraints(chain))


@pytest.mark.parametrize('mode', ['global', 'local', 'tian'])
@pytest.mark.parametrize('n', [1, 2, 3])
def test_complete_graphs_have_no_constraints(mode, n):
    assert nested_constraints(_complete(n), mode) == []


def test_unknown_mode(verma):
    with pytest.raises(InvalidArgument):
        nested_constraints(verma, 'pairwise')


def test_order_must_be_topological(verma):
    with pytest.raises(InvalidArgument):
        nested_constraints(verma, 'local', ['x4', 'x3', 'x2', 'x1'])
    with pytest.raises(InvalidArgument):
        nested_constraints(verma, 'global', ['x2', 'x1', 'x3', 'x4'])


def test_constraints_are_deterministic(verma):
    first = [c.as_dict() for c in global_nested_constraints(verma)]
    assert first == [c.as_dict() for c in global_nested_constraints(verma)]


@pytest.mark.parametrize('mode', ['global', 'local', 'tian'])
def test_member_of_the_verma_model(verma, mode):
    p = canonical_margin(verma, {v: 2 for v in verma.vertices}, 21)
    report = check_membership(verma, p, mode)
    assert report.holds
    assert set(report.verdicts) == {PASS}


@pytest.mark.parametrize('mode', ['global', 'local', 'tian'])
def test_verma_constraint_violated(verma, mode):
    p = random_kernel(verma.random, (), {v: 2 for v in verma.vertices}, 5, GENERIC)
    report = check_membership(verma, p, mode)
    assert not report.holds
    assert {'x1', 'x2', 'x3'} in [c.fixed_set for c, _ in report.violations]
    failed = [entry for entry in report.as_dict()['constraints'] if entry['verdict'] == FAIL]
    assert failed and all('violation' in entry for entry in failed)


def test_uniform_distribution_is_in_every_model(verma):
    p = Kernel.uniform(verma.random, (), {v: 2 for v in verma.vertices})
    assert check_membership(verma, p).holds
    assert nested_factorization_holds(verma, p)


def test_nested_factorization(verma):
    levels = {v: 2 for v in verma.vertices}
    assert nested_factorization_holds(verma, canonical_margin(verma, levels, 2))
    assert not nested_factorization_holds(verma, random_kernel(verma.random, (), levels, 2, GENERIC))


def test_zero_cells_make_verdicts_degenerate(chain):
    levels = {v: 2 for v in chain.vertices}
    p = Kernel.from_function(chain.random, (), levels, lambda x: 1 if x['a'] == x['b'] == x['c'] == 0 else 0)
    report = check_membership(chain, p, 'global')
    assert report.holds
    assert 'degenerate' in report.verdicts


@pytest.mark.parametrize('seed', range(10))
def test_fixing_order_invariance(two_orders, seed):
    p = canonical_margin(two_orders, {v: 2 for v in two_orders.vertices}, seed)
    assert fixing_order_invariant(two_orders, p, ['x4', 'x3', 'x1'], ['x3', 'x4', 'x1'])
    for steps in (['x4', 'x3', 'x1'], ['x3', 'x4', 'x1']):
        sequence = FixingSequence.checked(two_orders, steps)
        assert not apply_sequence_kernel(p, sequence).depends_on('x3')
    with pytest.raises(InvalidArgument):
        fixing_order_invariant(two_orders, p, ['x4'], ['x3'])


def test_node_constraints_of_a_singleton(chain):
    assert node_constraints('c', reach(chain, {'c'})) == []
    with pytest.raises(InvalidArgument):
        node_constraints('a', reach(chain, chain.random))


def test_constraint_validation(verma):
    witness = reach(verma, {'x4'})
    with pytest.raises(InvalidArgument):
        CiConstraint(witness.fixed_set, witness, {'x4'}, {'x4'}, set())
    with pytest.raises(InvalidArgument):
        CiConstraint({'x3'}, witness, {'x4'}, {'x1'}, set())
    constraint = CiConstraint(witness.fixed_set, witness, {'x4'}, {'x1'}, {'x3'})
    assert constraint.oriented().statement == 'x1 ⫫ x4 | x3 [fix x1,x2,x3]'
    assert constraint.as_dict()['witness'] == ['x1', 'x3', 'x2']


def test_report_counts(verma):
    constraints = global_nested_constraints(verma)
    p = Kernel.uniform(verma.random, (), {v: 2 for v in verma.vertices})
    report = evaluate_constraints(p, constraints, 'global')
    counts = report.as_dict()['counts']
    assert counts == {'pass': len(constraints), 'fail': 0, 'degenerate': 0}
