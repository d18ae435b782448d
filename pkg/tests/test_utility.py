import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import normalized_mutual_info_score

from conftest import complete, gnp, model_graphs, path
from oracles import modularity_direct, nmi_direct, set_partitions

from fuzzanon.anonymization import anonymize_es, apply_trace
from fuzzanon.generators import ModelSpec, generate
from fuzzanon.graph import Graph, GraphError, betweenness, lcc_fraction, modularity
from fuzzanon.utility import (Partition, UtilityConfig, detect_communities, nmi, nmi_anon,
                              nmi_stability, nmi_utility, top_central_overlap, top_nodes,
                              utility_report)

labelings = st.integers(2, 30).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 5), min_size=n, max_size=n),
                        st.lists(st.integers(0, 5), min_size=n, max_size=n)))


def two_k5():
    edges = [(i, j) for i in range(5) for j in range(i + 1, 5)]
    edges += [(i + 5, j + 5) for i, j in edges]
    return Graph(10, edges + [(4, 5)])


class TestPartition:
    def test_dense(self):
        p = Partition([7, 7, 3, 9])
        assert list(p.labels) == [0, 0, 1, 2]
        assert p.community_count == 3
        assert p.communities() == [[0, 1], [2], [3]]


class TestNMI:
    def test_examples(self):
        assert nmi([0, 0, 1, 1], [0, 0, 1, 1]) == 1.0
        assert nmi([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(0.0, abs=1e-12)
        assert nmi([0, 0, 1, 1], [5, 5, 2, 2]) == 1.0
        assert nmi([0, 0, 0], [1, 1, 1]) == 1.0

    def test_mismatch(self):
        with pytest.raises(GraphError):
            nmi([0, 1], [0, 1, 2])

    @settings(max_examples=200)
    @given(labelings)
    def test_oracles(self, ab):
        a, b = ab
        x = nmi(a, b)
        assert 0.0 <= x <= 1.0
        assert x == pytest.approx(nmi(b, a), abs=1e-12)
        assert x == pytest.approx(nmi_direct(a, b), abs=1e-9)
        assert x == pytest.approx(normalized_mutual_info_score(a, b, average_method="arithmetic"),
                                  abs=1e-9)

    @given(labelings, st.permutations(range(6)))
    def test_relabel_invariance(self, ab, perm):
        a, b = ab
        assert nmi(a, b) == pytest.approx(nmi([perm[x] for x in a], b), abs=1e-12)


class TestAggregates:
    def test_stability_identical(self):
        p = Partition([0, 0, 1, 1, 2])
        assert nmi_stability([p] * 20) == 1.0

    def test_single_pair(self):
        a, b = Partition([0, 0, 1, 1, 2, 2]), Partition([0, 0, 0, 1, 1, 1])
        assert nmi_stability([a, b]) == nmi(a, b)
        assert nmi_anon([a], [b]) == nmi(a, b)

    def test_needs_partitions(self):
        with pytest.raises(ValueError):
            nmi_stability([Partition([0, 1])])
        with pytest.raises(ValueError):
            nmi_anon([], [Partition([0, 1])])

    def test_double_loops(self):
        rng = random.Random(4)
        for _ in range(20):
            n = rng.randint(5, 40)
            ps = [Partition([rng.randrange(4) for _ in range(n)]) for _ in range(rng.randint(2, 6))]
            qs = [Partition([rng.randrange(4) for _ in range(n)]) for _ in range(rng.randint(1, 6))]
            pairs = list(itertools.combinations(ps, 2))
            ref_s = sum(nmi_direct(list(a.labels), list(b.labels)) for a, b in pairs) / len(pairs)
            ref_a = sum(nmi_direct(list(a.labels), list(b.labels)) for a in ps for b in qs)
            ref_a /= len(ps) * len(qs)
            assert nmi_stability(ps) == pytest.approx(ref_s, abs=1e-9)
            assert nmi_anon(ps, qs) == pytest.approx(ref_a, abs=1e-9)

    def test_anon_against_self_is_stability_like(self):
        ps = [Partition([i % 2, 0, 1, 1, i % 3]) for i in range(4)]
        total = sum(nmi(a, b) for a in ps for b in ps) / 16
        assert nmi_anon(ps, ps) == pytest.approx(total)

    @pytest.mark.parametrize("s,a,out", [(0.9, 0.8, 0.1), (0.8, 0.9, 0.0), (0.7, 0.7, 0.0)])
    def test_clamp(self, s, a, out):
        assert nmi_utility(s, a) == pytest.approx(out)


class TestCommunities:
    def test_two_cliques(self):
        g = two_k5()
        p = detect_communities(g, seed=0)
        assert p.communities() == [[0, 1, 2, 3, 4], [5, 6, 7, 8, 9]]
        best = max(modularity_direct(g, _labels(part, 10)) for part in set_partitions(list(range(10))))
        assert modularity(g, p.labels) == pytest.approx(best)

    def test_k3(self):
        assert detect_communities(complete(3), 0).community_count == 1

    def test_empty(self):
        with pytest.raises(GraphError):
            detect_communities(Graph(0))

    def test_seed_determinism(self):
        g = generate(ModelSpec("BA", 300, 3, seed=5))
        assert detect_communities(g, 7).labels == detect_communities(g, 7).labels

    @pytest.mark.parametrize("g", model_graphs(9, max_n=400, seed=30) + [gnp(80, 0.05, 1)],
                             ids=lambda g: f"n{g.node_count}m{g.edge_count}")
    def test_nonnegative_modularity(self, g):
        p = detect_communities(g, 3)
        assert len(p) == g.node_count
        assert modularity(g, p.labels) >= -1e-12

    def test_planted_partition(self):
        rng = random.Random(2)
        edges = []
        for a, b in itertools.combinations(range(120), 2):
            same = a // 30 == b // 30
            if rng.random() < (0.4 if same else 0.01):
                edges.append((a, b))
        g = Graph(120, edges)
        truth = [v // 30 for v in range(120)]
        assert nmi(detect_communities(g, 0), truth) > 0.9


def _labels(part, n):
    out = [0] * n
    for c, members in enumerate(part):
        for v in members:
            out[v] = c
    return out


class TestTopCentral:
    STAR_PATH = [(0, 1), (0, 2), (0, 3), (0, 4), (4, 5), (5, 6), (6, 7), (7, 8), (8, 9)]

    def test_identity(self):
        g = gnp(50, 0.1, 3)
        assert top_central_overlap(g, g.copy(), 10) == 0.0

    def test_disjoint(self):
        g = path(5)
        assert top_central_overlap(g, g, 2, scores=([0, 0, 5, 4, 0], [5, 4, 0, 0, 0])) == 1.0

    def test_star_path(self):
        g = Graph(10, self.STAR_PATH)
        h = g.copy()
        h.delete_edge(5, 6)
        assert betweenness(g).scores == [21, 0, 0, 0, 20, 20, 18, 14, 8, 0]
        assert betweenness(h).scores == [9, 0, 0, 0, 4, 0, 0, 2, 2, 0]
        assert top_nodes(betweenness(g).scores, 4) == [0, 4, 5, 6]
        assert top_nodes(betweenness(h).scores, 4) == [0, 4, 7, 8]
        assert top_central_overlap(g, h, 4) == 0.5

    def test_rescale_invariance(self):
        g = generate(ModelSpec("BA", 120, 2, seed=3))
        h = apply_trace(g, anonymize_es(g, 0, seed=1))
        b0, b1 = betweenness(g).scores, betweenness(h).scores
        base = top_central_overlap(g, h, 15, scores=(b0, b1))
        scaled = ([x * 3.5 for x in b0], [x * 0.01 for x in b1])
        assert top_central_overlap(g, h, 15, scores=scaled) == base

    def test_ties_by_id(self):
        assert top_nodes([1, 3, 3, 0, 3], 2) == [1, 2]

    def test_too_many(self):
        with pytest.raises(GraphError):
            top_central_overlap(path(3), path(3), 4)


class TestReport:
    def test_identity(self):
        g = generate(ModelSpec("WS", 200, 3, seed=1))
        r = utility_report(g, g.copy(), UtilityConfig(runs=4, top_n=20))
        assert r.frac_edges_deleted == 0
        assert r.delta_clustering == r.delta_path_length == r.delta_lcc == 0
        assert r.centrality_top_changed == 0
        assert 0.0 <= r.nmi_utility <= 1.0
        assert r.meta["nmi_normalization"] == "arithmetic"

    def test_five_percent(self):
        g = generate(ModelSpec("BA", 400, 4, seed=8))
        t = anonymize_es(g, 0, seed=2)
        h = apply_trace(g, t)
        r = utility_report(g, h, UtilityConfig(runs=4, top_n=50))
        assert abs(r.frac_edges_deleted - 0.05) <= 1 / g.edge_count
        assert 0 <= r.centrality_top_changed <= 1
        assert r.nmi_utility >= 0
        assert r.meta["original"]["lcc"] == lcc_fraction(g)
        assert r.meta["anonymized"]["lcc"] == lcc_fraction(h)
        assert r.delta_lcc == pytest.approx(abs(lcc_fraction(h) - lcc_fraction(g)) / lcc_fraction(g))
        d = r.to_dict()
        assert set(d) >= {"frac_edges_deleted", "delta_clustering", "delta_path_length",
                          "delta_lcc", "nmi_utility", "centrality_top_changed", "signed"}

    def test_zero_clustering_fallback(self):
        g = path(12)
        h = g.copy()
        h.delete_edge(5, 6)
        r = utility_report(g, h, UtilityConfig(runs=2, top_n=5))
        assert "clustering" in r.absolute_fallback
        assert r.delta_clustering == 0.0

    def test_node_mismatch(self):
        with pytest.raises(GraphError):
            utility_report(path(4), path(5))

    def test_deterministic(self):
        g = generate(ModelSpec("ER", 150, 3, seed=6))
        h = apply_trace(g, anonymize_es(g, 0, seed=2))
        cfg = UtilityConfig(runs=3, top_n=20, seed=11)
        assert utility_report(g, h, cfg).to_dict() == utility_report(g, h, cfg).to_dict()
