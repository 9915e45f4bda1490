import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphost.graphs import (
    GraphFormatError,
    LabeledGraph,
    WeightedGraph,
    canonicalize_edges,
    edge_homophily_degree,
    inject_structural_noise,
    load_graph,
    load_weighted_graph,
    random_edge_drop,
    save_graph,
)


def triangle(labels=(0, 0, 1)):
    return LabeledGraph(
        num_nodes=3,
        edges=np.array([[0, 1], [0, 2], [1, 2]]),
        features=np.eye(3),
        labels=np.array(labels),
    )


edge_lists = st.lists(
    st.tuples(st.integers(0, 9), st.integers(0, 9)).filter(lambda e: e[0] != e[1]),
    min_size=0,
    max_size=40,
)


class TestCanonicalization:
    def test_undirected_sorted_unique(self):
        edges = canonicalize_edges([(2, 1), (1, 2), (0, 3)], num_nodes=4)
        assert edges.tolist() == [[0, 3], [1, 2]]

    def test_directed_preserves_order(self):
        edges = canonicalize_edges([(2, 1), (1, 2), (2, 1)], num_nodes=3, directed=True)
        assert edges.tolist() == [[2, 1], [1, 2]]

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError, match="self-loop"):
            canonicalize_edges([(1, 1)], num_nodes=3)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError, match="outside"):
            canonicalize_edges([(0, 5)], num_nodes=3)

    @given(edge_lists)
    @settings(max_examples=100)
    def test_idempotent(self, edges):
        once = canonicalize_edges(edges, num_nodes=10)
        twice = canonicalize_edges(once, num_nodes=10)
        assert np.array_equal(once, twice)

    @given(edge_lists)
    @settings(max_examples=100)
    def test_permutation_invariant(self, edges):
        reversed_order = list(reversed(edges))
        assert np.array_equal(
            canonicalize_edges(edges, num_nodes=10),
            canonicalize_edges(reversed_order, num_nodes=10),
        )


class TestGraphInvariants:
    def test_labels_length_checked(self):
        with pytest.raises(ValueError, match="labels length"):
            LabeledGraph(num_nodes=3, edges=np.array([[0, 1]]), labels=np.array([0, 1]))

    def test_features_shape_checked(self):
        with pytest.raises(ValueError, match="features"):
            LabeledGraph(num_nodes=3, edges=np.array([[0, 1]]), features=np.zeros((2, 4)))

    def test_num_classes_inferred(self):
        g = triangle(labels=(0, 2, 1))
        assert g.num_classes == 3

    def test_immutable_arrays(self):
        g = triangle()
        with pytest.raises(ValueError):
            g.edges[0, 0] = 5

    def test_weighted_graph_range_checked(self):
        g = triangle()
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            WeightedGraph(base=g, edge_weights=np.array([0.5, 1.2, 0.1]))
        with pytest.raises(ValueError, match="weights for"):
            WeightedGraph(base=g, edge_weights=np.array([0.5]))

    def test_weighted_graph_defaults_to_unit(self):
        wg = WeightedGraph(base=triangle())
        assert np.array_equal(wg.edge_weights, np.ones(3))


class TestHomophilyDegree:
    def test_all_same_class(self):
        g = LabeledGraph(
            num_nodes=3, edges=np.array([[0, 1], [1, 2]]), labels=np.array([0, 0, 0])
        )
        assert edge_homophily_degree(g) == 1.0

    def test_hand_enumerated_third(self):
        # labels [0,0,1] over a triangle: only (0,1) joins same-class nodes
        assert edge_homophily_degree(triangle()) == pytest.approx(1.0 / 3.0)

    def test_empty_edge_list_is_undefined(self):
        g = LabeledGraph(num_nodes=3, edges=np.empty((0, 2)), labels=np.array([0, 0, 1]))
        with pytest.raises(ValueError, match="undefined HD"):
            edge_homophily_degree(g)

    def test_requires_labels(self):
        g = LabeledGraph(num_nodes=2, edges=np.array([[0, 1]]))
        with pytest.raises(ValueError, match="labels"):
            edge_homophily_degree(g)

    @given(
        st.lists(st.integers(0, 2), min_size=2, max_size=10),
        edge_lists.filter(lambda e: len(e) > 0),
    )
    @settings(max_examples=100)
    def test_always_a_fraction(self, labels, edges):
        n = len(labels)
        edges = [(u % n, v % n) for u, v in edges if u % n != v % n]
        if not edges:
            return
        g = LabeledGraph(num_nodes=n, edges=np.array(edges), labels=np.array(labels))
        assert 0.0 <= edge_homophily_degree(g) <= 1.0

    def test_photo_like_corpus_ingest(self, tmp_path):
        # Synthetic stand-in with the published homophily level: 10,000 edges
        # of which 9,546 connect same-label endpoints -> HD 95.46%.
        intra = [(i, j) for i in range(150) for j in range(i + 1, 150)][:9546]
        cross = [(i, 150 + j) for i in range(150) for j in range(150)][:454]
        g = LabeledGraph(
            num_nodes=300,
            edges=np.array(intra + cross),
            features=np.arange(300, dtype=float).reshape(-1, 1),
            labels=np.array([0] * 150 + [1] * 150),
        )
        save_graph(g, tmp_path / "photo_like", format="edgelist")
        loaded = load_graph(tmp_path / "photo_like", format="edgelist")
        assert loaded.num_edges == 10_000
        assert edge_homophily_degree(loaded) == pytest.approx(0.9546)


class TestStructuralNoise:
    def test_zero_ratio_is_identity(self):
        g = triangle()
        assert np.array_equal(inject_structural_noise(g, 0.0, seed=1).edges, g.edges)

    def test_edge_count_preserved(self, rng):
        edges = [(u, v) for u in range(30) for v in range(u + 1, 30) if rng.random() < 0.25]
        g = LabeledGraph(num_nodes=30, edges=np.array(edges))
        noisy = inject_structural_noise(g, 0.5, seed=3)
        assert noisy.num_edges == g.num_edges
        removed = g.edge_pairs() - noisy.edge_pairs()
        added = noisy.edge_pairs() - g.edge_pairs()
        assert len(removed) == len(added) == int(np.floor(0.25 * g.num_edges))

    def test_hundred_edges_half_noise(self):
        rng = np.random.default_rng(0)
        edges = set()
        while len(edges) < 100:
            u, v = rng.integers(0, 40, size=2)
            if u != v:
                edges.add((min(u, v), max(u, v)))
        g = LabeledGraph(num_nodes=40, edges=np.array(sorted(edges)))
        noisy = inject_structural_noise(g, 0.5, seed=9)
        assert noisy.num_edges == 100
        assert len(g.edge_pairs() - noisy.edge_pairs()) == 25

    def test_complete_graph_addition_pool_empty(self):
        n = 8
        complete = [(u, v) for u in range(n) for v in range(u + 1, n)]
        g = LabeledGraph(num_nodes=n, edges=np.array(complete))
        k = int(np.floor(0.25 * len(complete)))
        noisy = inject_structural_noise(g, 0.5, seed=4)
        # complement of the original edge set is empty -> nothing can be added
        assert noisy.num_edges == len(complete) - k
        assert noisy.edge_pairs() <= g.edge_pairs()

    def test_dense_graph_falls_back_to_enumeration(self):
        n = 12
        all_pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
        g = LabeledGraph(num_nodes=n, edges=np.array(all_pairs[:-3]))
        noisy = inject_structural_noise(g, 1.0, seed=5)
        # pool of 3 non-edges caps the additions
        removed = int(np.floor(0.5 * g.num_edges))
        assert noisy.num_edges == g.num_edges - removed + 3

    def test_invalid_ratio(self):
        with pytest.raises(ValueError, match="noise_ratio"):
            inject_structural_noise(triangle(), 1.5, seed=0)

    def test_no_self_loops_or_duplicates(self):
        g = triangle()
        noisy = inject_structural_noise(g, 1.0, seed=7)
        assert (noisy.edges[:, 0] != noisy.edges[:, 1]).all()
        assert len(noisy.edge_pairs()) == noisy.num_edges

    def test_pure_function_of_seed(self):
        g = triangle()
        a = inject_structural_noise(g, 1.0, seed=11)
        b = inject_structural_noise(g, 1.0, seed=11)
        assert np.array_equal(a.edges, b.edges)

    def test_nodes_and_features_unchanged(self):
        g = triangle()
        noisy = inject_structural_noise(g, 0.8, seed=2)
        assert noisy.num_nodes == g.num_nodes
        assert np.array_equal(noisy.features, g.features)
        assert np.array_equal(noisy.labels, g.labels)


class TestRandomEdgeDrop:
    def test_zero_drop_identity(self):
        g = triangle()
        assert np.array_equal(random_edge_drop(g, 0, seed=0).edges, g.edges)

    def test_full_drop(self):
        assert random_edge_drop(triangle(), 3, seed=0).num_edges == 0

    def test_exact_count_and_subset(self):
        g = triangle()
        dropped = random_edge_drop(g, 2, seed=5)
        assert dropped.num_edges == 1
        assert dropped.edge_pairs() <= g.edge_pairs()

    def test_seed_determinism(self):
        g = triangle()
        assert np.array_equal(
            random_edge_drop(g, 2, seed=3).edges, random_edge_drop(g, 2, seed=3).edges
        )

    def test_over_drop_rejected(self):
        with pytest.raises(ValueError, match="cannot drop"):
            random_edge_drop(triangle(), 4, seed=0)


class TestDirectedMode:
    def test_directed_edges_kept_as_given(self):
        g = LabeledGraph(
            num_nodes=3,
            edges=np.array([[2, 0], [0, 1]]),
            directed=True,
            labels=np.array([0, 0, 1]),
        )
        assert g.edges.tolist() == [[2, 0], [0, 1]]

    def test_directed_hd_counts_each_edge_once(self):
        # (0,1) and (1,0) are distinct directed edges; one homophilic pair
        g = LabeledGraph(
            num_nodes=3,
            edges=np.array([[0, 1], [1, 0], [1, 2]]),
            directed=True,
            labels=np.array([0, 0, 1]),
        )
        assert edge_homophily_degree(g) == pytest.approx(2.0 / 3.0)

    def test_directed_noise_respects_direction(self):
        g = LabeledGraph(
            num_nodes=6,
            edges=np.array([[0, 1], [1, 2], [2, 3], [3, 4], [4, 5], [5, 0]]),
            directed=True,
        )
        noisy = inject_structural_noise(g, 1.0, seed=2)
        assert noisy.num_edges == g.num_edges
        assert noisy.directed

    def test_directed_round_trip(self, tmp_path):
        g = LabeledGraph(
            num_nodes=3,
            edges=np.array([[2, 0], [0, 2]]),
            directed=True,
            features=np.eye(3),
        )
        save_graph(g, tmp_path / "d.json")
        loaded = load_graph(tmp_path / "d.json")
        assert loaded.directed
        assert np.array_equal(loaded.edges, g.edges)


class TestGraphIO:
    def test_json_round_trip(self, tmp_path):
        g = triangle()
        path = tmp_path / "g.json"
        save_graph(g, path)
        loaded = load_graph(path)
        assert loaded.num_nodes == g.num_nodes
        assert np.array_equal(loaded.edges, g.edges)
        assert np.array_equal(loaded.features, g.features)
        assert np.array_equal(loaded.labels, g.labels)
        assert loaded.num_classes == g.num_classes

    def test_edgelist_round_trip_exact_features(self, tmp_path):
        rng = np.random.default_rng(8)
        g = LabeledGraph(
            num_nodes=5,
            edges=np.array([[0, 1], [2, 4]]),
            features=rng.normal(size=(5, 3)),
            labels=np.array([0, 1, 0, 1, 1]),
        )
        save_graph(g, tmp_path / "g", format="edgelist")
        loaded = load_graph(tmp_path / "g", format="edgelist")
        assert np.array_equal(loaded.edges, g.edges)
        assert np.array_equal(loaded.features, g.features)  # repr round-trips
        assert np.array_equal(loaded.labels, g.labels)

    def test_missing_labels_key_loads_unlabeled(self, tmp_path):
        path = tmp_path / "unlabeled.json"
        path.write_text(
            '{"num_nodes": 2, "edges": [[0, 1]], "features": [[1.0], [2.0]]}'
        )
        g = load_graph(path)
        assert g.labels is None

    def test_edge_index_error_names_line(self, tmp_path):
        (tmp_path / "bad.features.csv").write_text("1.0\n2.0\n3.0\n")
        (tmp_path / "bad.edges").write_text("0 1\n# comment\n0 99\n")
        with pytest.raises(GraphFormatError, match=r"bad\.edges:3") as err:
            load_graph(tmp_path / "bad", format="edgelist")
        assert err.value.line == 3

    def test_malformed_feature_row(self, tmp_path):
        (tmp_path / "bad.features.csv").write_text("1.0,2.0\n3.0\n")
        (tmp_path / "bad.edges").write_text("0 1\n")
        with pytest.raises(GraphFormatError, match="expected 2 columns"):
            load_graph(tmp_path / "bad", format="edgelist")

    def test_truncated_json_reports_offset(self, tmp_path):
        path = tmp_path / "trunc.json"
        path.write_text('{"num_nodes": 2, "edges"')
        with pytest.raises(GraphFormatError, match="offset"):
            load_graph(path)

    def test_weighted_round_trip(self, tmp_path):
        wg = WeightedGraph(base=triangle(), edge_weights=np.array([0.25, 0.5, 1.0]))
        path = tmp_path / "wg.json"
        save_graph(wg, path)
        loaded = load_weighted_graph(path)
        assert np.array_equal(loaded.edge_weights, wg.edge_weights)
        assert np.array_equal(loaded.base.edges, wg.base.edges)

    def test_comments_and_blank_lines_allowed(self, tmp_path):
        (tmp_path / "c.features.csv").write_text("1.0\n2.0\n")
        (tmp_path / "c.edges").write_text("# header\n\n0 1  # trailing\n")
        g = load_graph(tmp_path / "c", format="edgelist")
        assert g.edges.tolist() == [[0, 1]]
