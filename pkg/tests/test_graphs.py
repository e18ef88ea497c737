import json

import pytest

from anneal_forge.bundled import data_text
from anneal_forge.errors import GraphFormatError
from anneal_forge.graphs import (
    ConflictGraph,
    ConflictRules,
    DegreeHistogram,
    Edge,
    LabelledGraph,
    Vertex,
    build_conflict_graph,
    connected_components,
    degree_distribution,
    generate_random_instance,
    graph_to_json,
    parse_labelled_graph,
    percolation_threshold,
)


def make_graph(n_edges, labels=None):
    """Tiny helper: path-ish graphs by explicit edge list."""
    vertices = tuple(Vertex(v) for v in sorted({x for e in n_edges for x in e}))
    edges = tuple(Edge(u, v) for u, v in n_edges)
    return LabelledGraph(vertices, edges)


K3 = LabelledGraph(tuple(Vertex(v) for v in "abc"),
                   (Edge("a", "b"), Edge("a", "c"), Edge("b", "c")))
PATH3 = LabelledGraph(tuple(Vertex(v) for v in "abc"),
                      (Edge("a", "b"), Edge("b", "c")))
K4 = LabelledGraph(tuple(Vertex(v) for v in "abcd"),
                   tuple(Edge(u, v) for u, v in
                         [("a", "b"), ("a", "c"), ("a", "d"),
                          ("b", "c"), ("b", "d"), ("c", "d")]))


class TestParse:
    def test_empty(self):
        g = parse_labelled_graph('{"vertices": [], "edges": []}')
        assert g.num_vertices == 0 and g.num_edges == 0

    def test_minimal(self):
        g = parse_labelled_graph(json.dumps({
            "vertices": [{"id": "v1", "label": "C"}, {"id": "v2", "label": "N"}],
            "edges": [{"u": "v1", "v": "v2", "label": "single"}],
        }))
        assert g.num_vertices == 2 and g.num_edges == 1
        assert g.label("v1") == "C"
        assert g.weight("v1") == 1.0
        assert g.edges[0].label == "single"

    def test_dangling_endpoint(self):
        with pytest.raises(GraphFormatError, match=r"edges\[0\].*dangling endpoint 'v9'"):
            parse_labelled_graph(json.dumps({
                "vertices": [{"id": "v1"}],
                "edges": [{"u": "v1", "v": "v9"}],
            }))

    def test_malformed_syntax(self):
        with pytest.raises(GraphFormatError, match="malformed syntax"):
            parse_labelled_graph("{not json")

    def test_duplicate_vertex(self):
        with pytest.raises(GraphFormatError, match=r"vertices\[1\].*duplicate"):
            parse_labelled_graph('{"vertices": [{"id": "a"}, {"id": "a"}], "edges": []}')

    def test_negative_weight(self):
        with pytest.raises(GraphFormatError, match=r"vertices\[0\].*negative"):
            parse_labelled_graph('{"vertices": [{"id": "a", "weight": -1}], "edges": []}')

    def test_provenance_roundtrip(self):
        g = ConflictGraph((Vertex("p", "C", 2.0),), (), {"p": ("u1", "a1")})
        back = parse_labelled_graph(graph_to_json(g))
        assert isinstance(back, ConflictGraph)
        assert back.provenance == {"p": ("u1", "a1")}
        assert back.weight("p") == 2.0

    def test_roundtrip_plain(self):
        back = parse_labelled_graph(graph_to_json(K4))
        assert back.vertex_ids() == K4.vertex_ids()
        assert back.num_edges == 6


class TestInvariants:
    def test_self_loop_rejected(self):
        with pytest.raises(ValueError, match="self-loop"):
            LabelledGraph((Vertex("a"),), (Edge("a", "a"),))

    def test_duplicate_edge_rejected(self):
        with pytest.raises(ValueError, match="duplicate edge"):
            LabelledGraph((Vertex("a"), Vertex("b")),
                          (Edge("a", "b"), Edge("b", "a")))

    def test_nonfinite_weight_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            LabelledGraph((Vertex("a", "", float("inf")),), ())


class TestConflictGraph:
    def test_single_matching_vertex(self):
        g1 = LabelledGraph((Vertex("u", "C"),), ())
        g2 = LabelledGraph((Vertex("a", "C"),), ())
        gc = build_conflict_graph(g1, g2)
        assert gc.num_vertices == 1 and gc.num_edges == 0

    def test_no_label_match(self):
        g1 = LabelledGraph((Vertex("u", "C"),), ())
        g2 = LabelledGraph((Vertex("a", "N"),), ())
        gc = build_conflict_graph(g1, g2)
        assert gc.num_vertices == 0

    def test_edge_vs_isolated_gives_k4(self):
        # One C-C bond against two isolated C atoms: all four pairings exist,
        # 4 bijection conflicts plus 2 edge-consistency conflicts form K4.
        g1 = LabelledGraph((Vertex("u1", "C"), Vertex("u2", "C")), (Edge("u1", "u2"),))
        g2 = LabelledGraph((Vertex("a1", "C"), Vertex("a2", "C")), ())
        gc = build_conflict_graph(g1, g2)
        assert gc.num_vertices == 4
        assert gc.num_edges == 6

    def test_label_mismatch_rule(self):
        g1 = LabelledGraph((Vertex("u1", "C"), Vertex("u2", "C")),
                           (Edge("u1", "u2", "single"),))
        g2 = LabelledGraph((Vertex("a1", "C"), Vertex("a2", "C")),
                           (Edge("a1", "a2", "double"),))
        on = build_conflict_graph(g1, g2)
        off = build_conflict_graph(g1, g2, ConflictRules(label_mismatch=False))
        assert on.num_edges == 6
        assert off.num_edges == 4

    def test_weight_rule(self):
        g1 = LabelledGraph((Vertex("u", "C"),), ())
        g2 = LabelledGraph((Vertex("a", "C"),), ())
        gc = build_conflict_graph(g1, g2, ConflictRules(vertex_weight=2.5))
        assert gc.weight(gc.vertex_ids()[0]) == 2.5

    def test_symmetry_up_to_transposition(self):
        g1 = LabelledGraph((Vertex("u1", "C"), Vertex("u2", "C"), Vertex("u3", "N")),
                           (Edge("u1", "u2"), Edge("u2", "u3")))
        g2 = LabelledGraph((Vertex("a1", "C"), Vertex("a2", "N")), (Edge("a1", "a2"),))
        ab = build_conflict_graph(g1, g2)
        ba = build_conflict_graph(g2, g1)
        swap = {vid: f"{p[1]}|{p[0]}" for vid, p in ba.provenance.items()}
        assert {swap[v] for v in ba.vertex_ids()} == set(ab.vertex_ids())
        ab_edges = {frozenset((e.u, e.v)) for e in ab.edges}
        ba_edges = {frozenset((swap[e.u], swap[e.v])) for e in ba.edges}
        assert ab_edges == ba_edges


class TestRandomInstance:
    def test_full_density(self):
        g = generate_random_instance(4, (100, 100), 3)
        assert g.num_edges == 6

    def test_zero_density(self):
        g = generate_random_instance(18, (0, 0), 7)
        assert g.num_vertices == 18 and g.num_edges == 0

    def test_density_window(self):
        g = generate_random_instance(18, (65, 75), 1)
        total = 18 * 17 // 2
        assert 65 <= g.density_percent() <= 75 + 100 / total

    def test_purity(self):
        a = generate_random_instance(12, (40, 60), 5)
        b = generate_random_instance(12, (40, 60), 5)
        assert a.edges == b.edges

    def test_single_vertex_warns(self):
        with pytest.warns(UserWarning):
            g = generate_random_instance(1, (50, 80), 0)
        assert g.num_edges == 0

    def test_unit_weights(self):
        g = generate_random_instance(6, (50, 50), 2)
        assert all(v.weight == 1.0 for v in g.vertices)


class TestDegreeDistribution:
    def test_k3(self):
        assert degree_distribution(K3).counts == {2: 3}

    def test_path3(self):
        assert degree_distribution(PATH3).counts == {1: 2, 2: 1}

    def test_sample_graph(self):
        g = parse_labelled_graph(data_text("sample_graph_18.json"))
        hist = degree_distribution(g)
        assert hist.counts == {11: 8, 12: 8, 13: 2}
        assert hist.n_vertices == 18

    def test_handshake(self):
        for seed in range(5):
            g = generate_random_instance(10, (30, 70), seed)
            hist = degree_distribution(g)
            assert sum(k * c for k, c in hist.counts.items()) == 2 * g.num_edges


class TestPercolation:
    def test_worked_example(self):
        hist = DegreeHistogram({11: 8, 12: 8, 13: 2}, 18)
        assert percolation_threshold(hist) == pytest.approx(0.0934, abs=5e-4)

    def test_cycle(self):
        assert percolation_threshold(DegreeHistogram({2: 5}, 5)) == 1.0

    def test_all_low_degree(self):
        with pytest.raises(ValueError, match="no giant component"):
            percolation_threshold(DegreeHistogram({1: 4}, 4))

    @pytest.mark.parametrize("d", range(2, 11))
    def test_single_degree(self, d):
        hist = DegreeHistogram({d: d + 1}, d + 1)
        assert percolation_threshold(hist) == pytest.approx(1 / (d - 1))

    def test_empty(self):
        with pytest.raises(ValueError, match="empty"):
            percolation_threshold(DegreeHistogram({}, 0))


class TestComponents:
    def test_empty_subset(self):
        assert connected_components(K4, set()) == []

    def test_split_path(self):
        comps = connected_components(PATH3, {"a", "c"})
        assert sorted(sorted(c) for c in comps) == [["a"], ["c"]]

    def test_k4_whole(self):
        comps = connected_components(K4, {"a", "b", "c", "d"})
        assert len(comps) == 1 and len(comps[0]) == 4

    def test_unknown_id(self):
        with pytest.raises(ValueError, match="unknown vertex"):
            connected_components(K4, {"zz"})
