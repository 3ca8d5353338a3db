"""affordnet: an affordance knowledge network.

Builds a typed graph (objects, attributes, actions) from dependency-parsed
sentences and answers situational queries: given observed objects and
attributes, which actions are recalled, and how strongly.
"""

__version__ = "0.1.0"

from .builder import (AttributePhrase, Edge, Extraction, Node, NodeKind,
                      NodeRef, build_graph, build_graph_parallel,
                      compose_edges, compose_nodes, extract_phrases)
from .corpus import (CorpusError, CorpusIssue, ParsedSentence, Token,
                     Violation, load_corpus, sentence_from_depjson,
                     sentence_to_depjson, validate_sentence, write_depjson)
from .engine import (AffordanceResult, Observation, QueryConfig,
                     UnknownFactorError, UnknownFactorWarning, acquired,
                     affordance, affordance_path, edge_weight, query,
                     shortest_distances)
from .evaluation import (HumanResponse, PhraseError, RankingResponse,
                         coverage_score, footrule, normalize_action,
                         rank_distance, weighted_coverage)
from .generation import (GenerationAborted, GenerationConfig, GenerationError,
                         GenerationLog, HttpTextGenClient, ReplayClient,
                         StubClient, TextGenRequest, TextGenResponse,
                         make_prompt, naive_parse, run_collection)
from .store import (GraphFormatError, GraphInvariantError, GraphMergeError,
                    GraphStats, KnowledgeGraph, load, merge, save, stats)

__all__ = [
    "AffordanceResult", "AttributePhrase", "CorpusError", "CorpusIssue",
    "Edge", "Extraction", "GenerationAborted", "GenerationConfig",
    "GenerationError", "GenerationLog", "GraphFormatError",
    "GraphInvariantError", "GraphMergeError", "GraphStats", "HumanResponse",
    "HttpTextGenClient", "KnowledgeGraph", "Node", "NodeKind", "NodeRef",
    "Observation", "ParsedSentence", "PhraseError", "QueryConfig",
    "RankingResponse", "ReplayClient", "StubClient", "TextGenRequest",
    "TextGenResponse", "Token", "UnknownFactorError", "UnknownFactorWarning",
    "Violation", "acquired", "affordance", "affordance_path", "build_graph",
    "build_graph_parallel", "compose_edges", "compose_nodes",
    "coverage_score", "edge_weight", "extract_phrases", "footrule",
    "load", "load_corpus", "make_prompt", "merge", "naive_parse",
    "normalize_action", "query", "rank_distance", "run_collection", "save",
    "sentence_from_depjson", "sentence_to_depjson", "shortest_distances",
    "stats", "validate_sentence", "weighted_coverage", "write_depjson",
]
