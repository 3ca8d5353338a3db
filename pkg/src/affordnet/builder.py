"""Phrase extraction and typed-graph composition from parsed sentences.

Every sentence contributes a set of typed nodes and a set of directed edge
increments. Nodes come in three kinds: objects (nouns), attributes
(adjectival and prepositional modifiers), and actions (verbs, with or
without an object). Composite nodes ("red apple", "slice apple",
"with friend") record the identities they are composed from.

Edge increments per sentence, deduplicated within the sentence:

* R1: constituent -> composite, for every composite node.
* R2: each object node -> the action node taking it as its object.
* R3: each verb-modifying attribute -> the objectless action of its verb.
* R4: objectless action -> each same-verb object-bearing action.

R2 and R4 coincide with R1 edges (an object-bearing action is composed of
its verb and its object); R3 is what lets a search started from an
environment or tool attribute reach actions at all. An edge's count is the
number of sentences that produced it at least once.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Sequence

from .corpus import ParsedSentence, Token

if TYPE_CHECKING:
    from .store import KnowledgeGraph


class NodeKind(str, Enum):
    OBJECT = "object"
    ATTRIBUTE = "attribute"
    ACTION = "action"

    def __str__(self) -> str:  # keep file formats and CLI output terse
        return self.value


#: Node identity: (kind, label). Labels are lemma phrases, space-joined.
NodeRef = tuple[NodeKind, str]


@dataclass(frozen=True)
class Node:
    """A graph vertex. Identity is (kind, label); composites carry the
    identities of the nodes they are composed from."""

    kind: NodeKind
    label: str
    constituents: frozenset[NodeRef] = frozenset()

    @property
    def ref(self) -> NodeRef:
        return (self.kind, self.label)

    @property
    def atomic(self) -> bool:
        return not self.constituents


@dataclass(frozen=True)
class Edge:
    """A directed edge with its composition count."""

    src: NodeRef
    dst: NodeRef
    count: int


@dataclass(frozen=True)
class AttributePhrase:
    """A modifier phrase attached to a noun or a verb.

    ``complement`` is set for preposition-fronted phrases ("with friend" ->
    complement "friend"); ``base`` is set for adverb-modified adjectives
    ("very red" -> base "red").
    """

    label: str
    complement: str | None = None
    base: str | None = None

    @property
    def prepositional(self) -> bool:
        return self.complement is not None


@dataclass
class Extraction:
    """The phrase structure pulled out of one clause: a verb and/or an
    object noun, plus the modifier phrases hanging off each."""

    verb: str | None = None
    object_head: str | None = None
    object_modifiers: list[AttributePhrase] = field(default_factory=list)
    verb_modifiers: list[AttributePhrase] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.verb is None and self.object_head is None:
            raise ValueError("extraction needs a verb or an object head")
        if self.verb is None and self.verb_modifiers:
            raise ValueError("verb modifiers require a verb")


_AUX_RELATIONS = {"aux", "cop"}
_OBJ_RELATIONS = {"obj", "dobj"}
_NEGATION_LEMMAS = {"not", "never", "n't"}


def _base_rel(relation: str) -> str:
    return relation.split(":", 1)[0]


def _children(sentence: ParsedSentence) -> dict[int, list[Token]]:
    by_head: dict[int, list[Token]] = defaultdict(list)
    for tok in sentence.tokens:
        by_head[tok.head].append(tok)
    return by_head


def _adjectival_phrase(modifier: Token, children: dict[int, list[Token]]) -> AttributePhrase:
    adverbs = [c.lemma for c in children[modifier.index]
               if _base_rel(c.relation) == "advmod" and c.pos == "adverb"]
    if adverbs:
        return AttributePhrase(label=" ".join(adverbs + [modifier.lemma]),
                               base=modifier.lemma)
    return AttributePhrase(label=modifier.lemma)


def _prepositional_phrase(noun: Token, children: dict[int, list[Token]]) -> AttributePhrase | None:
    cases = [c for c in children[noun.index] if _base_rel(c.relation) == "case"]
    if not cases:
        return None
    return AttributePhrase(label=f"{cases[0].lemma} {noun.lemma}",
                           complement=noun.lemma)


def _is_negated(verb: Token, children: dict[int, list[Token]]) -> bool:
    for child in children[verb.index]:
        rel = _base_rel(child.relation)
        if rel == "neg":
            return True
        if rel == "advmod" and child.lemma in _NEGATION_LEMMAS:
            return True
    return False


def _object_modifiers(noun: Token, children: dict[int, list[Token]]) -> list[AttributePhrase]:
    phrases = []
    for child in sorted(children[noun.index], key=lambda t: t.index):
        rel = _base_rel(child.relation)
        if rel == "amod":
            phrases.append(_adjectival_phrase(child, children))
        elif rel == "nmod" and child.pos == "noun" and child.relation != "nmod:poss":
            phrase = _prepositional_phrase(child, children)
            if phrase is not None:
                phrases.append(phrase)
    return phrases


def _verb_modifiers(verb: Token, children: dict[int, list[Token]]) -> list[AttributePhrase]:
    phrases = []
    for child in sorted(children[verb.index], key=lambda t: t.index):
        rel = _base_rel(child.relation)
        if rel in ("obl", "nmod") and child.pos == "noun":
            phrase = _prepositional_phrase(child, children)
            if phrase is not None:
                phrases.append(phrase)
        elif rel == "advmod" and child.pos == "adverb" \
                and child.lemma not in _NEGATION_LEMMAS:
            phrases.append(AttributePhrase(label=child.lemma))
    return phrases


def extract_phrases(sentence: ParsedSentence) -> list[Extraction]:
    """One extraction per main verb, plus one for a bare noun-rooted clause.

    Auxiliaries, copulas and participles used as noun modifiers do not form
    actions; negated verbs are dropped entirely. Only the direct object of
    a verb becomes its object.
    """
    children = _children(sentence)
    extractions: list[Extraction] = []
    for tok in sentence.tokens:
        if tok.pos != "verb":
            continue
        rel = _base_rel(tok.relation)
        if rel in _AUX_RELATIONS or rel == "amod":
            continue
        if _is_negated(tok, children):
            continue
        obj = next((c for c in sorted(children[tok.index], key=lambda t: t.index)
                    if _base_rel(c.relation) in _OBJ_RELATIONS and c.pos == "noun"), None)
        extractions.append(Extraction(
            verb=tok.lemma,
            object_head=obj.lemma if obj else None,
            object_modifiers=_object_modifiers(obj, children) if obj else [],
            verb_modifiers=_verb_modifiers(tok, children),
        ))

    roots = [t for t in sentence.tokens if t.head == 0]
    if roots and roots[0].pos == "noun":
        root = roots[0]
        extractions.append(Extraction(
            object_head=root.lemma,
            object_modifiers=_object_modifiers(root, children),
        ))
    return extractions


def _attribute_nodes(phrase: AttributePhrase) -> list[Node]:
    """The attribute node for a phrase plus any support nodes it is built on."""
    if phrase.complement is not None:
        comp = Node(NodeKind.OBJECT, phrase.complement)
        return [comp, Node(NodeKind.ATTRIBUTE, phrase.label,
                           frozenset({comp.ref}))]
    if phrase.base is not None:
        base = Node(NodeKind.ATTRIBUTE, phrase.base)
        return [base, Node(NodeKind.ATTRIBUTE, phrase.label,
                           frozenset({base.ref}))]
    return [Node(NodeKind.ATTRIBUTE, phrase.label)]


def _modified_object_label(head: str, phrase: AttributePhrase) -> str:
    # adjectival modifiers lead ("red apple"); prepositional ones trail
    # ("apple on table"), matching how each reads as a noun phrase.
    if phrase.prepositional:
        return f"{head} {phrase.label}"
    return f"{phrase.label} {head}"


def compose_nodes(extraction: Extraction) -> set[Node]:
    """All nodes a single extraction contributes to the graph."""
    nodes: dict[NodeRef, Node] = {}

    def add(node: Node) -> Node:
        return nodes.setdefault(node.ref, node)

    object_nodes: list[Node] = []
    if extraction.object_head is not None:
        bare = add(Node(NodeKind.OBJECT, extraction.object_head))
        object_nodes.append(bare)
        for phrase in extraction.object_modifiers:
            *support, attr = _attribute_nodes(phrase)
            for node in support:
                add(node)
            attr = add(attr)
            modified = add(Node(
                NodeKind.OBJECT,
                _modified_object_label(extraction.object_head, phrase),
                frozenset({attr.ref, bare.ref}),
            ))
            object_nodes.append(modified)

    if extraction.verb is not None:
        for phrase in extraction.verb_modifiers:
            for node in _attribute_nodes(phrase):
                add(node)
        verb_node = add(Node(NodeKind.ACTION, extraction.verb))
        for obj in object_nodes:
            add(Node(
                NodeKind.ACTION,
                f"{extraction.verb} {obj.label}",
                frozenset({verb_node.ref, obj.ref}),
            ))

    return set(nodes.values())


def compose_edges(extraction: Extraction,
                  nodes: Iterable[Node]) -> list[tuple[NodeRef, NodeRef]]:
    """The deduplicated edge increments (src, dst) for one extraction."""
    by_ref = {n.ref: n for n in nodes}
    increments: set[tuple[NodeRef, NodeRef]] = set()

    # R1: constituents feed their composites.
    for node in by_ref.values():
        for constituent in node.constituents:
            increments.add((constituent, node.ref))

    if extraction.verb is not None:
        verb_ref = (NodeKind.ACTION, extraction.verb)
        # R2 and R4: objects and the objectless action feed each
        # object-bearing action (already present as R1 edges).
        for ref, node in by_ref.items():
            if node.kind is NodeKind.ACTION and verb_ref in node.constituents:
                for constituent in node.constituents:
                    increments.add((constituent, ref))
        # R3: verb-modifying attributes recall the objectless action.
        for phrase in extraction.verb_modifiers:
            increments.add(((NodeKind.ATTRIBUTE, phrase.label), verb_ref))

    return sorted(increments)


def sentence_increments(sentence: ParsedSentence) -> tuple[set[Node], set[tuple[NodeRef, NodeRef]]]:
    """Nodes and once-per-sentence edge increments for one sentence."""
    nodes: set[Node] = set()
    increments: set[tuple[NodeRef, NodeRef]] = set()
    for extraction in extract_phrases(sentence):
        contributed = compose_nodes(extraction)
        nodes |= contributed
        increments |= set(compose_edges(extraction, contributed))
    return nodes, increments


def build_graph(corpus: Iterable[ParsedSentence],
                meta: dict | None = None) -> "KnowledgeGraph":
    """Fold extraction and composition over a sentence stream.

    Edge counts equal the number of sentences contributing each (src, dst)
    pair; nodes are deduplicated by (kind, label).
    """
    from .store import KnowledgeGraph

    nodes: dict[NodeRef, Node] = {}
    edges: dict[tuple[NodeRef, NodeRef], int] = defaultdict(int)
    for sentence in corpus:
        contributed, increments = sentence_increments(sentence)
        for node in contributed:
            existing = nodes.setdefault(node.ref, node)
            if existing.constituents != node.constituents:
                raise ValueError(
                    f"conflicting constituents for node {node.ref}")
        for pair in increments:
            edges[pair] += 1
    return KnowledgeGraph(nodes=nodes, edges=dict(edges), meta=dict(meta or {}))


def _build_chunk(sentences: Sequence[ParsedSentence]) -> "KnowledgeGraph":
    return build_graph(sentences)


def build_graph_parallel(sentences: Sequence[ParsedSentence], jobs: int = 1,
                         meta: dict | None = None) -> "KnowledgeGraph":
    """Parallel build: chunked builds merged by count addition.

    Composition is a pure per-sentence function and the merge is
    associative, so the result is identical for any job count.
    """
    from .store import KnowledgeGraph, merge

    if jobs <= 1 or len(sentences) < 2:
        return build_graph(sentences, meta=meta)

    from concurrent.futures import ProcessPoolExecutor

    chunk_size = max(1, (len(sentences) + jobs - 1) // jobs)
    chunks = [sentences[i:i + chunk_size]
              for i in range(0, len(sentences), chunk_size)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_build_chunk, chunks))
    graph = KnowledgeGraph()
    for part in parts:
        graph = merge(graph, part)
    graph.meta = dict(meta or {})
    return graph
