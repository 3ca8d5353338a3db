"""Comparison metrics against human action-recall responses.

Three metrics over a set of situations:

* coverage: share of distinct human-named actions that the network also
  acquired (affordance value at or below the threshold).
* weighted coverage: same numerator/denominator but counting mentions with
  multiplicity across respondents (duplicates within one respondent are
  collapsed first).
* rank distance: mean Spearman footrule between the system's top-5 action
  ordering and each respondent's reordering of those same five labels
  (0 identical, 12 reversed for five items).

Human phrases are free text ("slicing the apples"); they are reduced to a
(verb lemma, object lemma) pair and matched exactly against graph action
labels.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .builder import NodeKind
from .engine import Observation


class PhraseError(ValueError):
    """A free-text action phrase could not be normalized."""


class ResponseFormatError(Exception):
    """A response file record is malformed."""

    def __init__(self, message: str, path: str | Path | None = None,
                 record: int | None = None):
        where = str(path) if path is not None else "<responses>"
        if record is not None:
            where += f" (record {record})"
        super().__init__(f"{where}: {message}")
        self.record = record


@dataclass(frozen=True)
class HumanResponse:
    respondent: str
    situation: Observation
    actions: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.actions or any(not a.strip() for a in self.actions):
            raise ValueError("actions must be nonempty phrases")


@dataclass(frozen=True)
class RankingResponse:
    respondent: str
    situation: Observation
    ordering: tuple[str, ...]


@dataclass
class SkippedPhrase:
    """A report entry for a phrase excluded from scoring."""

    respondent: str
    phrase: str
    reason: str


# --- desk-scale English lemmatizer ---
# Sized for evaluation fixtures: an irregular table plus conservative
# suffix rules. Not a general-purpose lemmatizer.

_STOPWORDS = {"the", "a", "an", "my", "your", "his", "her", "its", "our",
              "their", "some", "this", "that", "these", "those", "to",
              "and", "it", "them", "up"}

_VERB_IRREGULAR = {
    "ate": "eat", "eaten": "eat", "eating": "eat",
    "bought": "buy", "buying": "buy",
    "chose": "choose", "chosen": "choose", "choosing": "choose",
    "cut": "cut", "cutting": "cut",
    "drew": "draw", "drawn": "draw", "drawing": "draw",
    "found": "find", "finding": "find",
    "gave": "give", "given": "give", "giving": "give",
    "had": "have", "has": "have", "having": "have",
    "held": "hold", "holding": "hold",
    "kept": "keep", "keeping": "keep",
    "left": "leave", "leaving": "leave",
    "made": "make", "making": "make",
    "put": "put", "putting": "put",
    "saw": "see", "seen": "see", "seeing": "see",
    "shared": "share", "sharing": "share",
    "sliced": "slice", "slicing": "slice",
    "sold": "sell", "selling": "sell",
    "took": "take", "taken": "take", "taking": "take",
    "threw": "throw", "thrown": "throw", "throwing": "throw",
    "traded": "trade", "trading": "trade",
    "used": "use", "using": "use",
    "went": "go", "gone": "go", "going": "go", "goes": "go",
    "craved": "crave", "craving": "crave",
    "placed": "place", "placing": "place",
    "compared": "compare", "comparing": "compare",
    "photographed": "photograph", "photographing": "photograph",
}

_NOUN_IRREGULAR = {
    "knives": "knife", "leaves": "leaf", "children": "child",
    "people": "person", "feet": "foot", "teeth": "tooth",
    "glasses": "glass", "dishes": "dish", "boxes": "box",
}

_VOWELS = "aeiou"


def _strip_repeated_final(stem: str) -> str:
    if len(stem) >= 3 and stem[-1] == stem[-2] and stem[-1] not in "szl":
        return stem[:-1]
    return stem


def lemma_verb(word: str) -> str:
    word = word.lower()
    if word in _VERB_IRREGULAR:
        return _VERB_IRREGULAR[word]
    if word.endswith("ies") and len(word) > 4:
        return word[:-3] + "y"
    if word.endswith(("ches", "shes", "sses", "xes", "zes")):
        return word[:-2]
    if word.endswith("oes"):
        return word[:-2]
    if word.endswith("s") and not word.endswith("ss"):
        return word[:-1]
    if word.endswith("ing") and len(word) > 5:
        return _strip_repeated_final(word[:-3])
    if word.endswith("ed") and len(word) > 4:
        stem = _strip_repeated_final(word[:-2])
        return stem
    return word


def lemma_noun(word: str) -> str:
    word = word.lower()
    if word in _NOUN_IRREGULAR:
        return _NOUN_IRREGULAR[word]
    if word.endswith("ies") and len(word) > 4:
        return word[:-3] + "y"
    if word.endswith(("ches", "shes", "sses", "xes", "zes")):
        return word[:-2]
    if word.endswith("s") and not word.endswith(("ss", "us")):
        return word[:-1]
    return word


def normalize_action(phrase: str) -> tuple[str, str | None]:
    """Reduce a free-text action phrase to (verb lemma, object lemma).

    The first content word is the verb, the last remaining content word is
    the object head ("slicing the red apples" -> ("slice", "apple")).
    Raises PhraseError when no content words survive.
    """
    words = [w.strip(".,!?;:\"'").lower() for w in phrase.split()]
    words = [w for w in words if w and w.isalpha() and w not in _STOPWORDS]
    if not words:
        raise PhraseError(f"no usable words in phrase {phrase!r}")
    verb = lemma_verb(words[0])
    if len(words) == 1:
        return verb, None
    return verb, lemma_noun(words[-1])


def action_label(verb: str, obj: str | None) -> str:
    """The graph label a normalized pair matches against."""
    return f"{verb} {obj}" if obj else verb


# --- metrics ---

def _normalized_sets(responses: Sequence[HumanResponse],
                     report: list[SkippedPhrase] | None
                     ) -> list[set[str]]:
    """Per-respondent sets of normalized action labels (duplicates within a
    respondent collapse here)."""
    out = []
    for response in responses:
        labels: set[str] = set()
        for phrase in response.actions:
            try:
                labels.add(action_label(*normalize_action(phrase)))
            except PhraseError as exc:
                if report is not None:
                    report.append(SkippedPhrase(
                        respondent=response.respondent,
                        phrase=phrase, reason=str(exc)))
        out.append(labels)
    return out


def coverage_score(responses: Sequence[HumanResponse], acquired: set[str],
                   report: list[SkippedPhrase] | None = None) -> float:
    """Percentage of distinct human actions present in the acquired set."""
    if not responses:
        raise ValueError("coverage needs at least one response")
    distinct: set[str] = set()
    for labels in _normalized_sets(responses, report):
        distinct |= labels
    if not distinct:
        raise ValueError("no scorable action phrases in responses")
    matched = len(distinct & acquired)
    return 100.0 * matched / len(distinct)


def weighted_coverage(responses: Sequence[HumanResponse], acquired: set[str],
                      report: list[SkippedPhrase] | None = None) -> float:
    """Coverage with mention multiplicity across respondents."""
    if not responses:
        raise ValueError("coverage needs at least one response")
    total = 0
    matched = 0
    for labels in _normalized_sets(responses, report):
        total += len(labels)
        matched += len(labels & acquired)
    if total == 0:
        raise ValueError("no scorable action phrases in responses")
    return 100.0 * matched / total


def footrule(reference: Sequence[str], ordering: Sequence[str]) -> int:
    """Spearman footrule: sum of absolute rank displacements."""
    if sorted(reference) != sorted(ordering):
        raise ValueError("orderings must rank the same labels")
    position = {label: i for i, label in enumerate(reference)}
    return sum(abs(position[label] - i) for i, label in enumerate(ordering))


def rank_distance(system_top: Sequence[str],
                  rankings: Sequence[RankingResponse]) -> float:
    """Mean footrule between the system ordering and each respondent's.

    Every ranking must be a true permutation of the presented labels.
    """
    if not rankings:
        raise ValueError("rank distance needs at least one ranking")
    if len(set(system_top)) != len(system_top):
        raise ValueError("system ordering contains duplicate labels")
    total = 0
    for ranking in rankings:
        if sorted(ranking.ordering) != sorted(system_top):
            raise ValueError(
                f"ranking by {ranking.respondent!r} is not a permutation of "
                f"the presented labels")
        total += footrule(system_top, ranking.ordering)
    return total / len(rankings)


# --- response files ---

def _parse_situation(raw: object) -> Observation:
    if not isinstance(raw, list):
        raise ValueError("'situation' must be a list of {kind, label} objects")
    factors = []
    for item in raw:
        factors.append((NodeKind(str(item["kind"])), str(item["label"])))
    return Observation(tuple(factors))


def load_responses(path: str | Path) -> list[HumanResponse]:
    """Read line-delimited {respondent, situation, actions} records."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for record_no, line in enumerate(
                (l for l in fh if l.strip()), start=1):
            try:
                obj = json.loads(line)
                out.append(HumanResponse(
                    respondent=str(obj["respondent"]),
                    situation=_parse_situation(obj["situation"]),
                    actions=tuple(str(a) for a in obj["actions"]),
                ))
            except (ValueError, KeyError, TypeError) as exc:
                raise ResponseFormatError(str(exc), path, record_no) from exc
    return out


def load_rankings(path: str | Path) -> list[RankingResponse]:
    """Read line-delimited {respondent, situation, ordering} records."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for record_no, line in enumerate(
                (l for l in fh if l.strip()), start=1):
            try:
                obj = json.loads(line)
                out.append(RankingResponse(
                    respondent=str(obj["respondent"]),
                    situation=_parse_situation(obj["situation"]),
                    ordering=tuple(str(a) for a in obj["ordering"]),
                ))
            except (ValueError, KeyError, TypeError) as exc:
                raise ResponseFormatError(str(exc), path, record_no) from exc
    return out
