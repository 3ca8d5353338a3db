"""Affordance scoring: edge weights, shortest-path distances, ranked queries.

An edge that was composed by n sentences gets weight decay**n, so edges
reinforced by many sentences become cheap to traverse. The affordance of an
action a given an observed factor x is the weighted shortest-path distance
from x to a, capped at a constant penalty that also stands in for "no path
at all". Multi-factor observations sum per-factor values, so an action only
scores well when it is cheaply reachable from several observed factors at
once; lower values mean stronger recall.
"""
from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import dataclass, field

from .builder import NodeKind, NodeRef
from .store import KnowledgeGraph

DEFAULT_DECAY = 0.99
DEFAULT_PENALTY = 5.0
DEFAULT_THRESHOLD = 2.0
DEFAULT_TOP_K = 10

_FACTOR_KINDS = (NodeKind.OBJECT, NodeKind.ATTRIBUTE)


class UnknownNodeError(KeyError):
    """Strict-mode lookup of a node reference that is not in the graph."""


class UnknownFactorError(ValueError):
    """Every factor of an observation is missing from the graph."""


class UnknownFactorWarning(UserWarning):
    """Some (not all) factors of an observation are missing from the graph."""


@dataclass(frozen=True)
class QueryConfig:
    """Scoring constants. ``top_k=None`` disables truncation."""

    decay: float = DEFAULT_DECAY
    penalty: float = DEFAULT_PENALTY
    threshold: float = DEFAULT_THRESHOLD
    top_k: int | None = DEFAULT_TOP_K

    def __post_init__(self) -> None:
        if not 0.0 < self.decay < 1.0:
            raise ValueError(f"decay must be in (0, 1), got {self.decay}")
        if self.penalty <= 0.0:
            raise ValueError(f"penalty must be positive, got {self.penalty}")
        if self.threshold <= 0.0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")
        if self.top_k is not None and self.top_k < 1:
            raise ValueError(f"top_k must be positive, got {self.top_k}")


@dataclass(frozen=True)
class Observation:
    """The observed situation: object and/or attribute node references."""

    factors: tuple[NodeRef, ...]

    def __post_init__(self) -> None:
        if not self.factors:
            raise ValueError("observation needs at least one factor")
        if len(set(self.factors)) != len(self.factors):
            raise ValueError("duplicate factors in observation")
        for kind, label in self.factors:
            if kind not in _FACTOR_KINDS:
                raise ValueError(f"factors must be objects or attributes, got {kind}:{label}")
            if not label:
                raise ValueError("factor label is empty")

    @classmethod
    def of(cls, *factors: tuple[NodeKind | str, str]) -> "Observation":
        return cls(tuple((NodeKind(k), label) for k, label in factors))

    @classmethod
    def parse(cls, specs: list[str]) -> "Observation":
        """Parse "kind:label" strings as used on the command line."""
        factors = []
        for spec in specs:
            kind, sep, label = spec.partition(":")
            if not sep:
                raise ValueError(f"expected kind:label, found {spec!r}")
            factors.append((NodeKind(kind.strip().lower()), label.strip()))
        return cls(tuple(factors))


@dataclass(frozen=True)
class AffordanceResult:
    """An action with its affordance value (lower = stronger recall)."""

    action: str
    value: float
    per_factor: dict[NodeRef, float] = field(compare=False, hash=False, default_factory=dict)


def edge_weight(count: int, decay: float = DEFAULT_DECAY) -> float:
    """Distance of an edge composed ``count`` times: decay**count."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if not 0.0 < decay < 1.0:
        raise ValueError(f"decay must be in (0, 1), got {decay}")
    return decay ** count


def shortest_distances(graph: KnowledgeGraph, source: NodeRef,
                       decay: float = DEFAULT_DECAY
                       ) -> tuple[dict[NodeRef, float], dict[NodeRef, NodeRef]]:
    """Single-source weighted shortest paths (all weights positive).

    Returns (distance, predecessor) maps over reachable nodes. Ties are
    broken toward lexicographically smaller frontier nodes, so predecessor
    chains are deterministic for a given graph.
    """
    if source not in graph.nodes:
        return {}, {}
    adjacency = graph.adjacency()
    dist: dict[NodeRef, float] = {source: 0.0}
    prev: dict[NodeRef, NodeRef] = {}
    done: set[NodeRef] = set()
    frontier: list[tuple[float, NodeRef]] = [(0.0, source)]
    while frontier:
        d, ref = heapq.heappop(frontier)
        if ref in done:
            continue
        done.add(ref)
        for dst, count in adjacency[ref]:
            candidate = d + decay ** count
            if candidate < dist.get(dst, math.inf):
                dist[dst] = candidate
                prev[dst] = ref
                heapq.heappush(frontier, (candidate, dst))
    return dist, prev


def affordance(graph: KnowledgeGraph, x: NodeRef, a: NodeRef,
               cfg: QueryConfig = QueryConfig(), *, strict: bool = False) -> float:
    """Shortest-path distance from x to a, capped at cfg.penalty.

    Absent nodes and unreachable targets score exactly cfg.penalty. With
    ``strict=True`` an absent x raises instead.
    """
    if strict and x not in graph.nodes:
        raise UnknownNodeError(x)
    dist, _ = shortest_distances(graph, x, cfg.decay)
    return min(dist.get(a, math.inf), cfg.penalty)


def affordance_path(graph: KnowledgeGraph, x: NodeRef, a: NodeRef,
                    cfg: QueryConfig = QueryConfig()
                    ) -> tuple[float, list[NodeRef] | None]:
    """Like :func:`affordance`, but also returns the witness path x..a
    (None when no path exists)."""
    dist, prev = shortest_distances(graph, x, cfg.decay)
    if a not in dist:
        return cfg.penalty, None
    path = [a]
    while path[-1] != x:
        path.append(prev[path[-1]])
    path.reverse()
    return min(dist[a], cfg.penalty), path


def query(graph: KnowledgeGraph, observation: Observation,
          cfg: QueryConfig = QueryConfig()) -> list[AffordanceResult]:
    """Rank every action reachable from at least one observed factor.

    value(action) = sum over factors of min(shortest distance, penalty).
    Results are sorted ascending by value, ties broken by action label, and
    truncated to cfg.top_k. Factors absent from the graph contribute the
    penalty and raise UnknownFactorWarning; if every factor is absent the
    query fails with UnknownFactorError.
    """
    missing = [f for f in observation.factors if f not in graph.nodes]
    if len(missing) == len(observation.factors):
        raise UnknownFactorError(
            "no observed factor is in the graph: "
            + ", ".join(f"{k.value}:{label}" for k, label in missing))
    if missing:
        warnings.warn(UnknownFactorWarning(
            "factors not in the graph (scored as penalty): "
            + ", ".join(f"{k.value}:{label}" for k, label in missing)))

    per_factor_dist = {
        factor: shortest_distances(graph, factor, cfg.decay)[0]
        for factor in observation.factors
    }
    results = []
    for node in graph.actions():
        if not any(node.ref in dist for dist in per_factor_dist.values()):
            continue
        breakdown = {
            factor: min(dist.get(node.ref, math.inf), cfg.penalty)
            for factor, dist in per_factor_dist.items()
        }
        results.append(AffordanceResult(
            action=node.label,
            value=sum(breakdown.values()),
            per_factor=breakdown,
        ))
    results.sort(key=lambda r: (r.value, r.action))
    if cfg.top_k is not None:
        results = results[:cfg.top_k]
    return results


def acquired(results: list[AffordanceResult],
             cfg: QueryConfig = QueryConfig()) -> list[AffordanceResult]:
    """Keep results whose value is at or below cfg.threshold (order kept)."""
    return [r for r in results if r.value <= cfg.threshold]
