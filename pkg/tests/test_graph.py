import numpy as np
import pytest

from hypertree.errors import InputError, ValidationError
from hypertree.graph import (
    HierarchyGraph,
    generate_balanced_tree,
    load_edge_list,
    nearest_common_ancestor,
    transitive_closure,
    validate_tree,
    write_edge_list,
)
from oracle import random_tree


class TestLoadEdgeList:
    def test_single_edge(self, tmp_path):
        p = tmp_path / "edges.tsv"
        p.write_text("a\tb\n")
        g = load_edge_list(p)
        assert g.labels == ["a", "b"]
        assert g.edges == {(0, 1)}

    def test_duplicates_collapse(self, tmp_path):
        p = tmp_path / "edges.tsv"
        p.write_text("a\tb\na\tb\n")
        g = load_edge_list(p)
        assert len(g.edges) == 1

    def test_self_loop_rejected_with_line_number(self, tmp_path):
        p = tmp_path / "edges.tsv"
        p.write_text("a\ta\n")
        with pytest.raises(InputError, match=":1"):
            load_edge_list(p)

    def test_malformed_line(self, tmp_path):
        p = tmp_path / "edges.tsv"
        p.write_text("a\tb\nx\ty\tz\n")
        with pytest.raises(InputError, match=":2"):
            load_edge_list(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            load_edge_list(tmp_path / "nope.tsv")

    def test_comments_and_blank_lines(self, tmp_path):
        p = tmp_path / "edges.tsv"
        p.write_text("# header\n\na\tb\n")
        g = load_edge_list(p)
        assert g.edges == {(0, 1)}

    def test_roundtrip(self, tmp_path):
        g = generate_balanced_tree(3, 2)
        out = tmp_path / "tree.tsv"
        write_edge_list(g, None, out)
        g2 = load_edge_list(out)
        assert set(g2.labels) == set(g.labels)
        as_labels = {(g2.labels[c], g2.labels[p]) for c, p in g2.edges}
        expected = {(g.labels[c], g.labels[p]) for c, p in g.edges}
        assert as_labels == expected


class TestGenerateBalancedTree:
    def test_paper_tree_size(self):
        g = generate_balanced_tree(5, 3)
        assert len(g.labels) == 156
        assert len(g.edges) == 155

    def test_path(self):
        g = generate_balanced_tree(1, 3)
        assert len(g.labels) == 4
        assert len(g.edges) == 3

    def test_small(self):
        g = generate_balanced_tree(2, 1)
        assert len(g.labels) == 3
        assert len(g.edges) == 2

    def test_labels_deterministic(self):
        g = generate_balanced_tree(2, 2)
        assert g.labels[0] == "0"
        assert "0.1" in g.labels and "0.2.2" in g.labels

    def test_always_validates(self):
        for b, l in [(1, 1), (2, 3), (5, 2)]:
            g = generate_balanced_tree(b, l)
            assert validate_tree(g) == 0

    def test_bad_parameters(self):
        with pytest.raises(InputError):
            generate_balanced_tree(0, 3)


class TestValidateTree:
    def test_root_of_balanced_tree(self):
        g = generate_balanced_tree(5, 3)
        assert g.labels[validate_tree(g)] == "0"

    def test_two_parents(self):
        g = HierarchyGraph(labels=["a", "b", "c"], edges={(0, 1), (0, 2)})
        with pytest.raises(ValidationError, match="'a'"):
            validate_tree(g)

    def test_cycle(self):
        g = HierarchyGraph(labels=["a", "b"], edges={(0, 1), (1, 0)})
        with pytest.raises(ValidationError):
            validate_tree(g)

    def test_multiple_roots(self):
        g = HierarchyGraph(labels=["a", "b", "c", "d"], edges={(0, 1), (2, 3)})
        with pytest.raises(ValidationError, match="multiple roots"):
            validate_tree(g)

    def test_depth_index(self):
        g = generate_balanced_tree(2, 2)
        validate_tree(g)
        assert g.depth_index[0] == 0
        assert g.depth_index[g.id_of("0.1.2")] == 2


class TestTransitiveClosure:
    def test_chain(self):
        # a -> b -> c -> d
        g = HierarchyGraph(labels=["a", "b", "c", "d"], edges={(0, 1), (1, 2), (2, 3)})
        assert transitive_closure(g) == {(0, 2), (0, 3), (1, 3)}

    def test_balanced_count(self):
        g = generate_balanced_tree(5, 3)
        assert len(transitive_closure(g)) == 25 * 1 + 125 * 2

    def test_star_empty(self):
        g = HierarchyGraph(labels=["r", "x", "y"], edges={(1, 0), (2, 0)})
        assert transitive_closure(g) == set()

    def test_random_tree_depth_sum(self, rng):
        for _ in range(20):
            n = int(rng.integers(3, 40))
            g = HierarchyGraph(labels=[str(i) for i in range(n)], edges=random_tree(n, rng))
            validate_tree(g)
            expected = sum(d - 1 for d in g.depth_index.values() if d >= 2)
            assert len(transitive_closure(g)) == expected


class TestNearestCommonAncestor:
    @pytest.fixture
    def tree(self):
        g = generate_balanced_tree(2, 3)
        validate_tree(g)
        return g

    def test_self(self, tree):
        x = tree.id_of("0.1.2")
        assert nearest_common_ancestor(tree, x, x) == x

    def test_siblings(self, tree):
        a, b = tree.id_of("0.1.1"), tree.id_of("0.1.2")
        assert nearest_common_ancestor(tree, a, b) == tree.id_of("0.1")

    def test_ancestor(self, tree):
        anc, node = tree.id_of("0.2"), tree.id_of("0.2.1.2")
        assert nearest_common_ancestor(tree, node, anc) == anc

    def test_unknown_node(self, tree):
        with pytest.raises(InputError):
            nearest_common_ancestor(tree, 0, 10_000)

    def test_symmetric_and_depth_bounded(self, rng):
        n = 30
        g = HierarchyGraph(labels=[str(i) for i in range(n)], edges=random_tree(n, rng))
        validate_tree(g)
        for _ in range(100):
            a, b = rng.integers(0, n, size=2)
            c1 = nearest_common_ancestor(g, int(a), int(b))
            c2 = nearest_common_ancestor(g, int(b), int(a))
            assert c1 == c2
            assert g.depth_index[c1] <= min(g.depth_index[int(a)], g.depth_index[int(b)])
            assert nearest_common_ancestor(g, c1, int(a)) == c1


class TestNeighbors:
    def test_undirected(self):
        g = generate_balanced_tree(2, 2)
        root_nbrs = g.neighbors(0)
        assert root_nbrs == {g.id_of("0.1"), g.id_of("0.2")}
        mid = g.id_of("0.1")
        assert g.neighbors(mid) == {0, g.id_of("0.1.1"), g.id_of("0.1.2")}

    def test_closure_included_on_request(self):
        g = generate_balanced_tree(2, 2)
        g.closure_edges = transitive_closure(g)
        g.invalidate_caches()
        leaf = g.id_of("0.1.1")
        assert 0 in g.neighbors(leaf, include_closure=True)
        assert 0 not in g.neighbors(leaf)
