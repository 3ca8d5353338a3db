import random

import pytest

from affordnet.builder import Node, NodeKind, build_graph
from affordnet.generation import naive_parse
from affordnet.store import (GraphFormatError, GraphInvariantError,
                             GraphMergeError, KnowledgeGraph, dumps, load,
                             loads, merge, save, stats)
from helpers import random_valid_graph

OBJ = NodeKind.OBJECT
ATTR = NodeKind.ATTRIBUTE
ACT = NodeKind.ACTION


def small_graph():
    apple = Node(OBJ, "apple")
    eat = Node(ACT, "eat")
    eat_apple = Node(ACT, "eat apple", frozenset({apple.ref, eat.ref}))
    return KnowledgeGraph(
        nodes={n.ref: n for n in (apple, eat, eat_apple)},
        edges={(apple.ref, eat_apple.ref): 2, (eat.ref, eat_apple.ref): 2},
        meta={"corpora": ["demo"]})


class TestSaveLoad:
    def test_empty_graph_is_header_only(self):
        text = dumps(KnowledgeGraph())
        assert text == 'affordgraph v1 {}\n'

    def test_line_count_matches_contents(self):
        lines = dumps(small_graph()).splitlines()
        assert len(lines) == 1 + 3 + 2
        assert lines[0].startswith("affordgraph v1 ")
        assert sum(1 for l in lines if l.startswith("N\t")) == 3
        assert sum(1 for l in lines if l.startswith("E\t")) == 2

    def test_edge_values_view(self):
        g = small_graph()
        edges = sorted(g.edge_values(), key=lambda e: (e.src, e.dst))
        assert [(e.src[1], e.dst[1], e.count) for e in edges] == \
            [("eat", "eat apple", 2), ("apple", "eat apple", 2)]

    def test_round_trip_identity(self, tmp_path):
        g = small_graph()
        path = tmp_path / "g.ag"
        save(g, path)
        reloaded = load(path)
        assert reloaded == g
        assert reloaded.meta == g.meta

    def test_save_load_save_byte_identical(self, tmp_path):
        g = small_graph()
        a, b = tmp_path / "a.ag", tmp_path / "b.ag"
        save(g, a)
        save(load(a), b)
        assert a.read_bytes() == b.read_bytes()

    def test_header_only_file_loads_empty(self):
        g = loads("affordgraph v1 {}\n")
        assert g.nodes == {} and g.edges == {} and g.meta == {}

    def test_round_trip_random_graphs(self, tmp_path):
        rng = random.Random(7)
        for i in range(40):
            g = random_valid_graph(rng)
            path = tmp_path / f"g{i}.ag"
            save(g, path)
            assert load(path) == g

    def test_dangling_edge_aborts_with_line(self):
        text = ("affordgraph v1 {}\n"
                "N\tobject\tapple\t\n"
                "E\tobject:apple\taction:eat\t1\n")
        with pytest.raises(GraphFormatError, match=r":3.*unknown node"):
            loads(text)

    def test_duplicate_node_aborts(self):
        text = ("affordgraph v1 {}\n"
                "N\tobject\tapple\t\n"
                "N\tobject\tapple\t\n")
        with pytest.raises(GraphFormatError, match="duplicate node"):
            loads(text)

    def test_malformed_line_aborts_with_location(self):
        with pytest.raises(GraphFormatError, match=":2"):
            loads("affordgraph v1 {}\nX\twhat\n")

    def test_missing_header(self):
        with pytest.raises(GraphFormatError, match="header"):
            loads("N\tobject\tapple\t\n")

    def test_bad_count_aborts(self):
        text = ("affordgraph v1 {}\n"
                "N\tobject\tapple\t\nN\taction\teat\t\n"
                "E\tobject:apple\taction:eat\tmany\n")
        with pytest.raises(GraphFormatError, match=":4"):
            loads(text)

    def test_forward_constituent_references_resolve(self):
        # action "eat apple" sorts before object "apple"; load is two-pass
        g = small_graph()
        assert loads(dumps(g)) == g

    def test_invalid_graph_refused_before_write(self):
        g = KnowledgeGraph(nodes={}, edges={((OBJ, "x"), (OBJ, "y")): 1})
        with pytest.raises(GraphInvariantError):
            dumps(g)

    def test_label_with_reserved_character_refused(self):
        node = Node(OBJ, "bad|label", frozenset({(OBJ, "bad")}))
        g = KnowledgeGraph(nodes={node.ref: node,
                                  (OBJ, "bad"): Node(OBJ, "bad")})
        with pytest.raises(GraphInvariantError, match="reserved"):
            dumps(g)

    def test_missing_file(self, tmp_path):
        with pytest.raises(GraphFormatError, match="does not exist"):
            load(tmp_path / "nope.ag")


class TestInvariants:
    def test_constituents_must_resolve(self):
        composite = Node(OBJ, "red apple", frozenset({(ATTR, "red"), (OBJ, "apple")}))
        g = KnowledgeGraph(nodes={composite.ref: composite})
        assert any("missing" in p for p in g.violations())

    def test_atomicity_matches_constituents(self):
        lonely = Node(OBJ, "red apple")  # multiword but no constituents
        g = KnowledgeGraph(nodes={lonely.ref: lonely})
        assert any("composite node has no constituents" in p for p in g.violations())

    def test_self_constituent_detected(self):
        node = Node(OBJ, "red apple", frozenset({(OBJ, "red apple"), (OBJ, "apple")}))
        g = KnowledgeGraph(nodes={node.ref: node, (OBJ, "apple"): Node(OBJ, "apple")})
        assert any("itself" in p for p in g.violations())


class TestMerge:
    def test_identity_element(self):
        g = small_graph()
        assert merge(g, KnowledgeGraph()) == g
        assert merge(KnowledgeGraph(), g) == g

    def test_commutative_on_disjoint_graphs(self):
        a = KnowledgeGraph(nodes={(OBJ, "apple"): Node(OBJ, "apple")})
        b = KnowledgeGraph(nodes={(OBJ, "pear"): Node(OBJ, "pear")})
        assert merge(a, b) == merge(b, a)

    def test_counts_add(self):
        g = small_graph()
        h = small_graph()
        h.edges = {((OBJ, "apple"), (ACT, "eat apple")): 4}
        merged = merge(g, h)
        assert merged.edges[((OBJ, "apple"), (ACT, "eat apple"))] == 6
        assert merged.edges[((ACT, "eat"), (ACT, "eat apple"))] == 2

    def test_random_merge_commutative_and_associative(self):
        rng = random.Random(21)
        for _ in range(30):
            a = random_valid_graph(rng)
            b = random_valid_graph(rng)
            c = random_valid_graph(rng)
            assert merge(a, b) == merge(b, a)
            assert merge(merge(a, b), c) == merge(a, merge(b, c))

    def test_constituent_conflict_aborts(self):
        v1 = Node(OBJ, "red apple", frozenset({(ATTR, "red"), (OBJ, "apple")}))
        v2 = Node(OBJ, "red apple", frozenset({(OBJ, "apple")}))
        a = KnowledgeGraph(nodes={v1.ref: v1, (ATTR, "red"): Node(ATTR, "red"),
                                  (OBJ, "apple"): Node(OBJ, "apple")})
        b = KnowledgeGraph(nodes={v2.ref: v2, (OBJ, "apple"): Node(OBJ, "apple")})
        with pytest.raises(GraphMergeError, match="red apple"):
            merge(a, b)

    def test_meta_union(self):
        a = KnowledgeGraph(meta={"corpora": ["x"], "builder": "affordnet 0.1.0"})
        b = KnowledgeGraph(meta={"corpora": ["y"], "builder": "affordnet 0.1.0"})
        merged = merge(a, b)
        assert merged.meta["corpora"] == ["x", "y"]
        assert merged.meta["builder"] == "affordnet 0.1.0"


class TestStats:
    def test_empty(self):
        s = stats(KnowledgeGraph())
        assert s.node_count == 0 and s.edge_count == 0 and s.max_count == 0
        assert s.nodes_by_kind == {"object": 0, "attribute": 0, "action": 0}
        assert s.degree_histogram == {}

    def test_single_edge(self):
        g = KnowledgeGraph(
            nodes={(OBJ, "a"): Node(OBJ, "a"), (ACT, "b"): Node(ACT, "b")},
            edges={((OBJ, "a"), (ACT, "b")): 1})
        s = stats(g)
        assert s.edge_count == 1 and s.max_count == 1
        assert s.degree_histogram == {1: 2}

    def test_hand_tally_on_small_corpus(self):
        buy = naive_parse("I buy the apple at the store.")
        eat = naive_parse("I eat the apple.")
        g = build_graph([buy, buy, eat])
        s = stats(g)
        # nodes: apple, store / at store / buy, eat, buy apple, eat apple
        assert s.nodes_by_kind == {"object": 2, "attribute": 1, "action": 4}
        assert s.node_count == 7
        assert s.edge_count == 6
        assert s.max_count == 2
        assert s.degree_histogram == {1: 2, 2: 5}
