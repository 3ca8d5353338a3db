"""Parser backends: a deterministic built-in parser and a CoreNLP client.

A backend turns one raw sentence into a list of token dicts
``{"i", "surface", "lemma", "pos", "head", "rel"}`` with the coarse POS
tags used by the depjson interchange format, or returns None when the
sentence cannot be parsed.

The built-in backend handles the constrained first-person sentences the
generation prompts produce ("I <verb> the <adj>* <noun> [<prep> ...]").
It needs no external service, so golden fixtures and CI stay hermetic.
The CoreNLP backend drives a CoreNLP HTTP server for arbitrary text.
"""
from __future__ import annotations

import json
import urllib.error
import urllib.parse
import urllib.request

#: Universal POS tag -> coarse tag; must match the corpus loader's table
#: (see the pos_mapping.json conformance fixture).
UPOS_TO_COARSE = {
    "NOUN": "noun",
    "PROPN": "noun",
    "VERB": "verb",
    "ADJ": "adjective",
    "ADV": "adverb",
    "ADP": "preposition",
}

COARSE_DEFAULT = "other"

#: Penn Treebank tag prefixes -> Universal POS, longest prefix wins.
PTB_TO_UPOS = {
    "NNPS": "PROPN", "NNP": "PROPN", "NNS": "NOUN", "NN": "NOUN",
    "VB": "VERB", "MD": "AUX",
    "JJ": "ADJ", "RB": "ADV",
    "IN": "ADP", "TO": "ADP", "RP": "ADP",
    "DT": "DET", "PDT": "DET", "PRP": "PRON", "WP": "PRON",
    "CC": "CCONJ", "CD": "NUM", "UH": "INTJ",
}


def coarse_pos(upos: str) -> str:
    return UPOS_TO_COARSE.get(upos.upper(), COARSE_DEFAULT)


def ptb_to_upos(tag: str) -> str:
    for prefix in sorted(PTB_TO_UPOS, key=len, reverse=True):
        if tag.startswith(prefix):
            return PTB_TO_UPOS[prefix]
    if tag in (".", ",", ":", "``", "''", "-LRB-", "-RRB-"):
        return "PUNCT"
    return "X"


class BackendUnavailable(Exception):
    """The selected backend cannot run; the message carries a setup hint."""


def token(i, surface, lemma, upos, head, rel):
    return {"i": i, "surface": surface, "lemma": lemma.lower(),
            "pos": coarse_pos(upos), "head": head, "rel": rel}


# --- built-in backend ---

_DETERMINERS = {"the", "a", "an", "my", "your", "his", "her", "its", "our",
                "their", "some", "this", "that", "these", "those"}
_PREPOSITIONS = {"in", "on", "at", "with", "under", "over", "from", "to",
                 "by", "near", "behind", "beside", "into", "onto", "inside",
                 "above", "below"}
_ADVERBS = {"very", "quite", "really", "too", "so", "rather", "almost",
            "often", "always", "usually", "not", "never"}

_NOUN_LEMMAS = {"knives": "knife", "leaves": "leaf", "children": "child",
                "people": "person", "feet": "foot", "teeth": "tooth",
                "glasses": "glass", "dishes": "dish", "boxes": "box"}


def _noun_lemma(word: str) -> str:
    if word in _NOUN_LEMMAS:
        return _NOUN_LEMMAS[word]
    if word.endswith("ies") and len(word) > 4:
        return word[:-3] + "y"
    if word.endswith(("ches", "shes", "sses", "xes", "zes")):
        return word[:-2]
    if word.endswith("s") and not word.endswith(("ss", "us")):
        return word[:-1]
    return word


def _is_adverb(word: str) -> bool:
    return word in _ADVERBS or word.endswith("ly")


class BuiltinBackend:
    """Rule-based parser for plain first-person single sentences."""

    name = "builtin"

    def parse(self, text: str) -> list[dict] | None:
        stripped = text.strip()
        if not stripped:
            return None
        final_punct = stripped[-1] if stripped[-1] in ".!?" else None
        words = stripped.rstrip(".!?").split()
        if len(words) < 2 or words[0] != "I":
            return None
        if any(not w.replace("'", "").replace("-", "").isalpha() for w in words):
            return None
        lowers = [w.lower() for w in words]
        n = len(words)

        verb_pos = 1
        while verb_pos < n and _is_adverb(lowers[verb_pos]):
            verb_pos += 1
        if verb_pos >= n or lowers[verb_pos] in _DETERMINERS | _PREPOSITIONS:
            return None

        # phrase groups after the verb, one per preposition
        groups: list[tuple[int | None, list[int]]] = []
        current: tuple[int | None, list[int]] | None = None
        for pos in range(verb_pos + 1, n):
            if lowers[pos] in _PREPOSITIONS:
                if current is not None:
                    groups.append(current)
                current = (pos, [])
            else:
                if current is None:
                    current = (None, [])
                current[1].append(pos)
        if current is not None:
            groups.append(current)

        info: list[tuple[str, str, int, str] | None] = [None] * n  # lemma,upos,head,rel
        info[0] = ("i", "PRON", verb_pos, "nsubj")
        info[verb_pos] = (lowers[verb_pos], "VERB", -1, "root")
        for pos in range(1, verb_pos):
            info[pos] = (lowers[pos], "ADV", verb_pos, "advmod")

        saw_object = False
        for case_pos, members in groups:
            content = [p for p in members
                       if lowers[p] not in _DETERMINERS and not _is_adverb(lowers[p])]
            if not content:
                if case_pos is not None or any(
                        lowers[p] in _DETERMINERS for p in members):
                    return None  # stranded preposition or determiner
                for p in members:
                    info[p] = (lowers[p], "ADV", verb_pos, "advmod")
                continue
            noun_pos = content[-1]
            if case_pos is None and not saw_object:
                noun_rel = "obj"
                saw_object = True
            else:
                noun_rel = "obl"
            info[noun_pos] = (_noun_lemma(lowers[noun_pos]), "NOUN",
                              verb_pos, noun_rel)
            if case_pos is not None:
                info[case_pos] = (lowers[case_pos], "ADP", noun_pos, "case")
            adjectives = content[:-1]
            for p in adjectives:
                info[p] = (lowers[p], "ADJ", noun_pos, "amod")
            for p in members:
                if lowers[p] in _DETERMINERS:
                    info[p] = (lowers[p], "DET", noun_pos, "det")
                elif _is_adverb(lowers[p]):
                    following = next((q for q in adjectives if q > p), None)
                    head = following if following is not None else verb_pos
                    info[p] = (lowers[p], "ADV", head, "advmod")

        if any(entry is None for entry in info):
            return None
        tokens = []
        for pos, (lemma, upos, head, rel) in enumerate(info):
            head_index = 0 if head == -1 else head + 1
            tokens.append(token(pos + 1, words[pos], lemma, upos, head_index, rel))
        if final_punct is not None:
            tokens.append(token(n + 1, final_punct, final_punct, "PUNCT",
                                verb_pos + 1, "punct"))
        return tokens


# --- CoreNLP backend ---

class CoreNLPBackend:
    """Client for a CoreNLP server's HTTP annotation endpoint."""

    name = "corenlp"

    PROPERTIES = {
        "annotators": "tokenize,ssplit,pos,lemma,depparse",
        "outputFormat": "json",
    }

    def __init__(self, url: str, timeout: float = 60.0):
        if not url:
            raise BackendUnavailable(
                "no CoreNLP server configured; start one (e.g. "
                "`java -mx4g edu.stanford.nlp.pipeline.StanfordCoreNLPServer "
                "-port 9000`) and pass --corenlp-url or set CORENLP_URL")
        self.url = url
        self.timeout = timeout

    def _request(self, text: str) -> dict:
        query = urllib.parse.urlencode(
            {"properties": json.dumps(self.PROPERTIES)})
        request = urllib.request.Request(
            f"{self.url.rstrip('/')}/?{query}",
            data=text.encode("utf-8"), method="POST")
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                return json.loads(response.read().decode("utf-8"))
        except (urllib.error.URLError, TimeoutError) as exc:
            raise BackendUnavailable(
                f"CoreNLP server at {self.url} not reachable ({exc}); "
                "start the server or use --backend builtin") from exc

    def parse(self, text: str) -> list[dict] | None:
        if not text.strip():
            return None
        payload = self._request(text.strip())
        sentences = payload.get("sentences", [])
        if len(sentences) != 1:
            return None  # not a single sentence
        sentence = sentences[0]
        by_index = {t["index"]: t for t in sentence["tokens"]}
        heads: dict[int, tuple[int, str]] = {}
        for dep in sentence.get("basicDependencies", []):
            heads[dep["dependent"]] = (dep["governor"], dep["dep"].lower())
        tokens = []
        for index in sorted(by_index):
            raw = by_index[index]
            head, rel = heads.get(index, (0, "dep"))
            tokens.append(token(index, raw["word"],
                                raw.get("lemma", raw["word"]),
                                ptb_to_upos(raw["pos"]), head,
                                rel if rel != "root" else "root"))
        return tokens or None


BACKENDS = ("builtin", "corenlp")


def get_backend(name: str, corenlp_url: str | None = None):
    if name == "builtin":
        return BuiltinBackend()
    if name == "corenlp":
        return CoreNLPBackend(corenlp_url or "")
    raise ValueError(f"unknown backend {name!r}; expected one of {BACKENDS}")
