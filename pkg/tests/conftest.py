import pytest

from src.commands import load_graph
from src.graph import MixedGraph


@pytest.fixture
def verma():
    return load_graph('verma')


@pytest.fixture
def verma_latent():
    return load_graph('verma_latent')


@pytest.fixture
def bow():
    return load_graph('bow')


@pytest.fixture
def two_orders():
    return load_graph('two_orders')


@pytest.fixture
def front_door():
    return load_graph('front_door')


@pytest.fixture
def chain():
    return MixedGraph(['a', 'b', 'c'], directed=[('a', 'b'), ('b', 'c')])


@pytest.fixture
def binary():
    def levels(graph):
        return {v: 2 for v in graph.vertices}
    return levels
