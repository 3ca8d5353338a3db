"""Shared test utilities: random valid graphs and an independent
path-enumeration oracle for affordance values."""
from __future__ import annotations

import math
import random
from collections import defaultdict

from affordnet.builder import Node, NodeKind, NodeRef
from affordnet.engine import QueryConfig
from affordnet.store import KnowledgeGraph

WORDS = ["apple", "pear", "plum", "knife", "store", "tree", "friend", "red",
         "ripe", "cut", "buy", "hold", "wash", "photo", "basket", "table"]

KINDS = (NodeKind.OBJECT, NodeKind.ATTRIBUTE, NodeKind.ACTION)


def composite_node(kind: NodeKind, first: str, second: str) -> Node:
    """A two-word composite whose constituents depend only on (kind, label),
    so independently generated graphs always agree on shared identities."""
    label = f"{first} {second}"
    if kind is NodeKind.OBJECT:
        constituents = {(NodeKind.ATTRIBUTE, first), (NodeKind.OBJECT, second)}
    elif kind is NodeKind.ACTION:
        constituents = {(NodeKind.ACTION, first), (NodeKind.OBJECT, second)}
    else:
        constituents = {(NodeKind.OBJECT, second)}
    return Node(kind, label, frozenset(constituents))


def random_valid_graph(rng: random.Random, max_nodes: int = 12,
                       max_count: int = 5, edge_prob: float = 0.25
                       ) -> KnowledgeGraph:
    """A random graph satisfying all store invariants."""
    nodes: dict[NodeRef, Node] = {}

    def add(node: Node) -> None:
        nodes.setdefault(node.ref, node)

    target = rng.randint(1, max_nodes)
    while len(nodes) < target:
        kind = rng.choice(KINDS)
        if rng.random() < 0.3 and len(nodes) + 3 <= max_nodes:
            first, second = rng.sample(WORDS, 2)
            composite = composite_node(kind, first, second)
            for ckind, clabel in composite.constituents:
                add(Node(ckind, clabel))
            add(composite)
        else:
            add(Node(kind, rng.choice(WORDS)))

    refs = sorted(nodes)
    edges: dict[tuple[NodeRef, NodeRef], int] = {}
    for src in refs:
        for dst in refs:
            if src != dst and rng.random() < edge_prob:
                edges[(src, dst)] = rng.randint(1, max_count)
    return KnowledgeGraph(nodes=nodes, edges=edges)


def enumerate_affordance(graph: KnowledgeGraph, x: NodeRef, a: NodeRef,
                         cfg: QueryConfig) -> float:
    """Brute-force oracle: minimum over all simple paths, or the penalty."""
    if x not in graph.nodes or a not in graph.nodes:
        return cfg.penalty
    adjacency = defaultdict(list)
    for (src, dst), count in graph.edges.items():
        adjacency[src].append((dst, cfg.decay ** count))
    best = math.inf

    def dfs(node: NodeRef, distance: float, visited: frozenset) -> None:
        nonlocal best
        if node == a:
            best = min(best, distance)
            return
        for dst, weight in adjacency[node]:
            if dst not in visited:
                dfs(dst, distance + weight, visited | {dst})

    dfs(x, 0.0, frozenset({x}))
    return min(best, cfg.penalty)
