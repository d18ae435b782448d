import numpy as np
import pytest

from fuzzanon.generators import (ModelSpec, ba_edge_count, generate, ring_lattice_clustering,
                                 rng_for)
from fuzzanon.graph import GraphError, average_clustering


def test_er_exact_edges():
    for s in range(3):
        g = generate(ModelSpec("ER", 500, 4, seed=s))
        assert (g.node_count, g.edge_count) == (500, 2000)
        g.audit()


@pytest.mark.parametrize("m", [1, 2, 4, 10])
def test_ba_edge_count(m):
    g = generate(ModelSpec("BA", 500, m, seed=3))
    assert g.node_count == 500
    assert g.edge_count == ba_edge_count(500, m) == m * (500 - m) + m * (m - 1) // 2
    # newcomers attach to m distinct earlier nodes
    assert min(g.degrees()) >= m


def test_ws_lattice():
    g = generate(ModelSpec("WS", 500, 4, rewire_p=0.0, seed=1))
    assert set(g.degrees()) == {8}
    assert g.edge_count == 2000
    assert average_clustering(g) == pytest.approx(ring_lattice_clustering(4), abs=1e-9)
    assert ring_lattice_clustering(4) == pytest.approx(9 / 14)


def test_ws_rewired_keeps_edge_count():
    g = generate(ModelSpec("WS", 500, 4, rewire_p=0.05, seed=1))
    assert g.edge_count == 2000
    assert set(g.degrees()) != {8}
    g.audit()


@pytest.mark.parametrize("model", ["ER", "BA", "WS"])
def test_determinism(model):
    a = generate(ModelSpec(model, 300, 5, seed=42))
    b = generate(ModelSpec(model, 300, 5, seed=42))
    c = generate(ModelSpec(model, 300, 5, seed=43))
    assert a.edge_list() == b.edge_list()
    assert a.edge_list() != c.edge_list()


def test_er_mean_degree():
    means = [np.mean(generate(ModelSpec("ER", 500, 4, seed=s)).degrees()) for s in range(10)]
    assert abs(np.mean(means) - 8) / 8 < 0.05


def test_ba_heavier_tail_than_er():
    for s in range(10):
        ba = max(generate(ModelSpec("BA", 500, 4, seed=s)).degrees())
        er = max(generate(ModelSpec("ER", 500, 4, seed=s)).degrees())
        assert ba > er


def test_lowercase_model():
    assert ModelSpec("ba", 10, 2).model == "BA"


@pytest.mark.parametrize("kw", [dict(model="WS", n=8, m=4), dict(model="ER", n=5, m=3),
                                dict(model="XX", n=10, m=1), dict(model="ER", n=1, m=1),
                                dict(model="BA", n=10, m=0), dict(model="BA", n=4, m=4),
                                dict(model="WS", n=10, m=2, rewire_p=1.5)])
def test_invalid(kw):
    with pytest.raises(GraphError):
        ModelSpec(**kw)


def test_rng_is_pcg64():
    assert isinstance(rng_for(1).bit_generator, np.random.PCG64)
