"""Knowledge-graph value type: validation, persistence, merging, statistics.

The on-disk format is line-delimited UTF-8 text, diffable and canonically
ordered so that save -> load -> save is byte-identical:

    affordgraph v1 {"corpora":["..."]}
    N\t<kind>\t<label>\t<kind>:<label>|<kind>:<label>   (constituents; may be empty)
    E\t<src kind>:<src label>\t<dst kind>:<dst label>\t<count>

Nodes are sorted by (kind, label) and edges by (src, dst). Constituent
entries are kind-qualified because the same label can name nodes of
different kinds (e.g. a verb lemma used both as an action and as a
participial attribute).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .builder import Edge, Node, NodeKind, NodeRef

HEADER_PREFIX = "affordgraph v1"

_LABEL_FORBIDDEN = ("\t", "\n", "|")


class GraphInvariantError(Exception):
    """The graph violates a structural invariant; refused before write."""


class GraphFormatError(Exception):
    """A graph file could not be parsed."""

    def __init__(self, message: str, path: str | Path | None = None,
                 line: int | None = None):
        where = str(path) if path is not None else "<graph>"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}")
        self.line = line


class GraphMergeError(Exception):
    """Two graphs disagree on the composition of the same node identity."""


@dataclass
class KnowledgeGraph:
    """Nodes keyed by (kind, label), edge counts keyed by (src, dst)."""

    nodes: dict[NodeRef, Node] = field(default_factory=dict)
    edges: dict[tuple[NodeRef, NodeRef], int] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __eq__(self, other: object) -> bool:
        # Structural equality; meta is provenance, not content.
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges

    def node(self, kind: NodeKind, label: str) -> Node | None:
        return self.nodes.get((kind, label))

    def actions(self) -> Iterable[Node]:
        return (n for n in self.nodes.values() if n.kind is NodeKind.ACTION)

    def edge_values(self) -> Iterable[Edge]:
        return (Edge(src, dst, count) for (src, dst), count in self.edges.items())

    def adjacency(self) -> dict[NodeRef, list[tuple[NodeRef, int]]]:
        """Sorted out-edge lists; deterministic iteration order."""
        adj: dict[NodeRef, list[tuple[NodeRef, int]]] = {ref: [] for ref in self.nodes}
        for (src, dst), count in sorted(self.edges.items()):
            adj[src].append((dst, count))
        return adj

    def violations(self) -> list[str]:
        problems = []
        for ref, node in self.nodes.items():
            if ref != node.ref:
                problems.append(f"node stored under wrong key {ref}")
            if not node.label:
                problems.append(f"{ref}: empty label")
            if any(ch in node.label for ch in _LABEL_FORBIDDEN):
                problems.append(f"{ref}: label contains a reserved character")
            if node.ref in node.constituents:
                problems.append(f"{ref}: node lists itself as a constituent")
            atomic = len(node.label.split()) == 1
            if atomic and node.constituents:
                problems.append(f"{ref}: single-lemma node has constituents")
            if not atomic and not node.constituents:
                problems.append(f"{ref}: composite node has no constituents")
            for constituent in node.constituents:
                if constituent not in self.nodes:
                    problems.append(f"{ref}: constituent {constituent} missing from graph")
        for (src, dst), count in self.edges.items():
            if src not in self.nodes:
                problems.append(f"edge source {src} missing from graph")
            if dst not in self.nodes:
                problems.append(f"edge target {dst} missing from graph")
            if src == dst:
                problems.append(f"self-edge on {src}")
            if not isinstance(count, int) or count < 1:
                problems.append(f"edge {src} -> {dst} has count {count!r}")
        return problems

    def validate(self) -> None:
        problems = self.violations()
        if problems:
            raise GraphInvariantError("; ".join(problems))


def _format_ref(ref: NodeRef) -> str:
    kind, label = ref
    return f"{kind.value}:{label}"


def _parse_ref(text: str) -> NodeRef:
    kind, sep, label = text.partition(":")
    if not sep or not label:
        raise ValueError(f"expected kind:label, found {text!r}")
    return (NodeKind(kind), label)


def dumps(graph: KnowledgeGraph) -> str:
    """Serialize to the canonical text format (validates first)."""
    graph.validate()
    meta_json = json.dumps(graph.meta, ensure_ascii=False, sort_keys=True,
                           separators=(",", ":"))
    lines = [f"{HEADER_PREFIX} {meta_json}"]
    for ref in sorted(graph.nodes):
        node = graph.nodes[ref]
        constituents = "|".join(sorted(_format_ref(c) for c in node.constituents))
        lines.append(f"N\t{node.kind.value}\t{node.label}\t{constituents}")
    for (src, dst), count in sorted(graph.edges.items()):
        lines.append(f"E\t{_format_ref(src)}\t{_format_ref(dst)}\t{count}")
    return "\n".join(lines) + "\n"


def save(graph: KnowledgeGraph, path: str | Path) -> None:
    Path(path).write_text(dumps(graph), encoding="utf-8")


def loads(text: str, path: str | Path | None = None) -> KnowledgeGraph:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(HEADER_PREFIX):
        raise GraphFormatError(f"missing '{HEADER_PREFIX}' header", path, 1)
    meta_text = lines[0][len(HEADER_PREFIX):].strip()
    try:
        meta = json.loads(meta_text) if meta_text else {}
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"bad header metadata: {exc}", path, 1) from exc

    nodes: dict[NodeRef, Node] = {}
    raw_edges: list[tuple[int, NodeRef, NodeRef, int]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        tag = fields[0]
        try:
            if tag == "N":
                if len(fields) != 4:
                    raise ValueError(f"expected 4 fields, found {len(fields)}")
                kind = NodeKind(fields[1])
                label = fields[2]
                constituents = frozenset(
                    _parse_ref(part) for part in fields[3].split("|") if part)
                node = Node(kind, label, constituents)
                if node.ref in nodes:
                    raise ValueError(f"duplicate node {_format_ref(node.ref)}")
                nodes[node.ref] = node
            elif tag == "E":
                if len(fields) != 4:
                    raise ValueError(f"expected 4 fields, found {len(fields)}")
                raw_edges.append(
                    (lineno, _parse_ref(fields[1]), _parse_ref(fields[2]), int(fields[3])))
            else:
                raise ValueError(f"unknown record tag {tag!r}")
        except ValueError as exc:
            raise GraphFormatError(str(exc), path, lineno) from exc

    edges: dict[tuple[NodeRef, NodeRef], int] = {}
    for lineno, src, dst, count in raw_edges:
        for endpoint in (src, dst):
            if endpoint not in nodes:
                raise GraphFormatError(
                    f"edge references unknown node {_format_ref(endpoint)}", path, lineno)
        if (src, dst) in edges:
            raise GraphFormatError(
                f"duplicate edge {_format_ref(src)} -> {_format_ref(dst)}", path, lineno)
        edges[(src, dst)] = count

    graph = KnowledgeGraph(nodes=nodes, edges=edges, meta=meta)
    try:
        graph.validate()
    except GraphInvariantError as exc:
        raise GraphFormatError(str(exc), path) from exc
    return graph


def load(path: str | Path) -> KnowledgeGraph:
    path = Path(path)
    if not path.is_file():
        raise GraphFormatError("file does not exist", path)
    return loads(path.read_text(encoding="utf-8"), path)


def _merge_meta(a: dict, b: dict) -> dict:
    """Key-wise set union; commutative and associative by construction."""
    def as_set(value) -> set[str]:
        if isinstance(value, list):
            return {str(v) for v in value}
        return {str(value)}

    merged = {}
    for key in set(a) | set(b):
        values = set()
        if key in a:
            values |= as_set(a[key])
        if key in b:
            values |= as_set(b[key])
        ordered = sorted(values)
        merged[key] = ordered[0] if len(ordered) == 1 else ordered
    return merged


def merge(a: KnowledgeGraph, b: KnowledgeGraph) -> KnowledgeGraph:
    """Node union, edge-count sum. Same identity must mean same composition."""
    nodes = dict(a.nodes)
    for ref, node in b.nodes.items():
        existing = nodes.get(ref)
        if existing is None:
            nodes[ref] = node
        elif existing.constituents != node.constituents:
            raise GraphMergeError(
                f"node {_format_ref(ref)} has conflicting constituents; "
                "were these graphs built by the same builder?")
    edges = dict(a.edges)
    for pair, count in b.edges.items():
        edges[pair] = edges.get(pair, 0) + count
    return KnowledgeGraph(nodes=nodes, edges=edges, meta=_merge_meta(a.meta, b.meta))


@dataclass(frozen=True)
class GraphStats:
    nodes_by_kind: dict[str, int]
    node_count: int
    edge_count: int
    max_count: int
    degree_histogram: dict[int, int]


def stats(graph: KnowledgeGraph) -> GraphStats:
    """Pure summary: node counts per kind, edge totals, degree histogram."""
    by_kind = {kind.value: 0 for kind in NodeKind}
    for node in graph.nodes.values():
        by_kind[node.kind.value] += 1
    degree: dict[NodeRef, int] = {ref: 0 for ref in graph.nodes}
    for edge in graph.edge_values():
        degree[edge.src] += 1
        degree[edge.dst] += 1
    histogram: dict[int, int] = {}
    for value in degree.values():
        histogram[value] = histogram.get(value, 0) + 1
    return GraphStats(
        nodes_by_kind=by_kind,
        node_count=len(graph.nodes),
        edge_count=len(graph.edges),
        max_count=max(graph.edges.values(), default=0),
        degree_histogram=dict(sorted(histogram.items())),
    )
