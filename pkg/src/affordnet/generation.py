"""Staged corpus collection against a pluggable text-generation endpoint.

The protocol grows a corpus around one seed object in four stages:

1. ``stage1_count`` prompts asking for sentences with the seed as direct
   object.
2. For every other object discovered so far, ``per_item_count`` prompts
   asking for sentences that place the object somewhere (location-bearing
   phrases like "apple on table").
3. For every located noun phrase discovered in stage 2, ``per_item_count``
   prompts asking for actions taking that phrase as object.
4. For every attribute phrase collected anywhere, ``per_item_count``
   prompts asking for knowledge about it.

Discovery reuses the graph builder's phrase extraction, applied to each
accepted sentence with a pluggable parser (the bundled one handles the
plain "I <verb> the <noun> ..." shapes the prompts ask for; production
corpora should be parsed by a real dependency parser downstream).

Every request and response is appended to a GenerationLog; a run can be
replayed from its log to reproduce the corpus byte for byte.
"""
from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field, asdict
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Protocol

from .builder import Extraction, extract_phrases
from .corpus import ParsedSentence, Token

STAGES = (1, 2, 3, 4)


class GenerationError(Exception):
    """The endpoint failed or returned an unusable response."""


class GenerationAborted(Exception):
    """Too many prompts failed outright; partial results are attached."""

    def __init__(self, message: str, corpus: list[str], log: "GenerationLog"):
        super().__init__(message)
        self.corpus = corpus
        self.log = log


@dataclass(frozen=True)
class GenerationConfig:
    seed_object: str
    stage1_count: int = 200
    per_item_count: int = 10
    model_id: str = "default"
    rate_limit: float = 1.0  # requests per second; 0 disables throttling
    max_retries: int = 3
    retry_backoff: float = 0.5  # seconds, doubled per retry
    failure_threshold: int = 10  # failed prompts before the run aborts
    located_feedback: bool = True  # stage 3 targets located phrases from stage 2

    def __post_init__(self) -> None:
        if not self.seed_object.strip():
            raise ValueError("seed_object must be nonempty")
        if self.stage1_count < 1:
            raise ValueError(f"stage1_count must be >= 1, got {self.stage1_count}")
        if self.per_item_count < 1:
            raise ValueError(f"per_item_count must be >= 1, got {self.per_item_count}")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.failure_threshold < 1:
            raise ValueError("failure_threshold must be >= 1")

    @classmethod
    def from_file(cls, path: str | Path) -> "GenerationConfig":
        """Read a ``key = value`` config file ('#' starts a comment)."""
        values: dict[str, object] = {}
        converters: dict[str, Callable] = {
            "seed_object": str, "model_id": str,
            "stage1_count": int, "per_item_count": int,
            "max_retries": int, "failure_threshold": int,
            "rate_limit": float, "retry_backoff": float,
            "located_feedback": lambda v: v.lower() in ("1", "true", "yes"),
        }
        for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or key not in converters:
                raise ValueError(f"{path}:{lineno}: bad config line {raw!r}")
            values[key] = converters[key](value)
        if "seed_object" not in values:
            raise ValueError(f"{path}: missing required key 'seed_object'")
        return cls(**values)  # type: ignore[arg-type]


@dataclass(frozen=True)
class TextGenRequest:
    prompt: str
    model_id: str


@dataclass(frozen=True)
class TextGenResponse:
    completions: tuple[str, ...]
    usage: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not self.completions:
            raise ValueError("a successful response carries at least one completion")


class TextGenClient(Protocol):
    def complete(self, request: TextGenRequest) -> TextGenResponse: ...


@dataclass
class LogRecord:
    index: int
    stage: int
    target: str
    prompt: str
    raw: list[str]  # completions as returned, [] on failure
    accepted: list[str]
    rejected: list[str]
    error: str | None
    attempts: int
    ts: float


@dataclass
class GenerationLog:
    """Append-only run record; replayable and line-serializable."""

    records: list[LogRecord] = field(default_factory=list)

    def append(self, record: LogRecord) -> None:
        self.records.append(record)

    def corpus(self) -> list[str]:
        return [s for rec in self.records for s in rec.accepted]

    def request_count(self) -> int:
        return len(self.records)

    def write(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.records:
                fh.write(json.dumps(asdict(rec), ensure_ascii=False, sort_keys=True))
                fh.write("\n")

    @classmethod
    def read(cls, path: str | Path) -> "GenerationLog":
        log = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    log.append(LogRecord(**json.loads(line)))
        return log


# --- prompts ---

def default_templates() -> dict[int, str]:
    """Stage templates shipped with the package ('{target}' placeholder)."""
    templates = {}
    for stage in STAGES:
        text = resources.files("affordnet.templates").joinpath(f"stage{stage}.txt") \
            .read_text(encoding="utf-8")
        templates[stage] = text.strip()
    return templates


def load_templates(directory: str | Path) -> dict[int, str]:
    """Read stage1.txt..stage4.txt overrides from a directory."""
    templates = default_templates()
    for stage in STAGES:
        candidate = Path(directory) / f"stage{stage}.txt"
        if candidate.is_file():
            templates[stage] = candidate.read_text(encoding="utf-8").strip()
    return templates


def make_prompt(stage: int, target: str,
                templates: dict[int, str] | None = None) -> str:
    if stage not in STAGES:
        raise ValueError(f"stage must be one of {STAGES}, got {stage}")
    if not target.strip():
        raise ValueError("prompt target must be nonempty")
    templates = templates or default_templates()
    return templates[stage].format(target=target)


# --- acceptance filter ---

_SENTENCE_END = re.compile(r"[.!?]")


def accept_completion(text: str) -> str | None:
    """Normalize a completion to a single first-person sentence, or reject.

    Accepts exactly one sentence (at most one terminator, at the end) whose
    first word is "I"; leading/trailing quotes and whitespace are stripped.
    """
    candidate = text.strip().strip('"“”').strip()
    if not candidate or "\n" in candidate:
        return None
    ends = list(_SENTENCE_END.finditer(candidate))
    if len(ends) > 1 or (ends and ends[0].end() != len(candidate)):
        return None
    first = candidate.split(None, 1)[0]
    if first != "I" and not first.startswith("I'"):
        return None
    return candidate


# --- bundled parser for discovery ---

_DETERMINERS = {"the", "a", "an", "my", "your", "his", "her", "its", "our",
                "their", "some", "this", "that", "these", "those"}
_PREPOSITIONS = {"in", "on", "at", "with", "under", "over", "from", "to",
                 "by", "near", "behind", "beside", "into", "onto", "inside",
                 "above", "below"}
_VERB_LEMMAS = {"has": "have", "is": "be", "goes": "go", "does": "do"}
_ADVERBS = {"very", "quite", "really", "too", "so", "rather", "almost",
            "often", "always", "usually", "not", "never"}


def _is_adverb(word: str) -> bool:
    return word in _ADVERBS or word.endswith("ly")


def _verb_lemma(word: str) -> str:
    return _VERB_LEMMAS.get(word, word)


def naive_parse(text: str, sent_id: str = "", stage: str = "generated"
                ) -> ParsedSentence | None:
    """Parse the constrained sentence shapes the prompts ask for.

    Handles "I [adverb] <verb> [det] [adj]* <noun> ([prep] [det] [adj]*
    <noun>)*"; prepositional phrases attach to the verb. Returns None when
    the text does not fit. This is a discovery convenience for generated
    sentences, not a real parser.
    """
    words = text.strip().rstrip(".!?").split()
    n = len(words)
    if n < 2 or words[0] != "I":
        return None
    if any(not w.replace("'", "").replace("-", "").isalpha() for w in words):
        return None
    lowers = [w.lower() for w in words]

    # verb = first word after "I" that is not an adverb
    verb_pos = 1
    while verb_pos < n and _is_adverb(lowers[verb_pos]):
        verb_pos += 1
    if verb_pos >= n or lowers[verb_pos] in _DETERMINERS | _PREPOSITIONS:
        return None

    # phrase groups after the verb, split at each preposition
    groups: list[tuple[int | None, list[int]]] = []  # (preposition pos, members)
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

    heads = [0] * n  # 0-based head positions; -1 marks the root
    rels = [""] * n
    poses = [""] * n
    heads[0], rels[0], poses[0] = verb_pos, "nsubj", "other"
    heads[verb_pos], rels[verb_pos], poses[verb_pos] = -1, "root", "verb"
    for pos in range(1, verb_pos):
        heads[pos], rels[pos], poses[pos] = verb_pos, "advmod", "adverb"

    for case_pos, members in groups:
        content = [p for p in members
                   if lowers[p] not in _DETERMINERS and not _is_adverb(lowers[p])]
        if not content:
            if case_pos is not None or any(lowers[p] in _DETERMINERS for p in members):
                return None  # stranded preposition or determiner
            for p in members:
                heads[p], rels[p], poses[p] = verb_pos, "advmod", "adverb"
            continue
        noun_pos = content[-1]
        poses[noun_pos] = "noun"
        heads[noun_pos] = verb_pos
        rels[noun_pos] = "obj" if case_pos is None else "obl"
        if case_pos is not None:
            heads[case_pos], rels[case_pos], poses[case_pos] = noun_pos, "case", "preposition"
        adjectives = [p for p in content[:-1]]
        for p in adjectives:
            heads[p], rels[p], poses[p] = noun_pos, "amod", "adjective"
        for p in members:
            if lowers[p] in _DETERMINERS:
                heads[p], rels[p], poses[p] = noun_pos, "det", "other"
            elif _is_adverb(lowers[p]):
                following = next((q for q in adjectives if q > p), None)
                heads[p] = following if following is not None else verb_pos
                rels[p], poses[p] = "advmod", "adverb"

    tokens = []
    for pos in range(n):
        lemma = _verb_lemma(lowers[pos]) if pos == verb_pos else lowers[pos]
        tokens.append(Token(pos + 1, words[pos], lemma, poses[pos],
                            0 if heads[pos] == -1 else heads[pos] + 1, rels[pos]))
    sentence = ParsedSentence(id=sent_id or "gen", tokens=tuple(tokens), stage=stage)
    from .corpus import validate_sentence
    if validate_sentence(sentence):
        return None
    return sentence


# --- clients ---

class StubClient:
    """Deterministic endpoint for tests and offline runs: maps prompt
    substrings to canned completions, cycling per pattern."""

    def __init__(self, fixture: list[tuple[str, list[str]]],
                 default: str | None = None):
        self._fixture = [(pattern, list(responses)) for pattern, responses in fixture]
        self._cursor = {pattern: 0 for pattern, _ in self._fixture}
        self._default = default

    @classmethod
    def from_file(cls, path: str | Path) -> "StubClient":
        """JSON fixture: {"patterns": [{"match": ..., "responses": [...]}],
        "default": optional}."""
        spec = json.loads(Path(path).read_text(encoding="utf-8"))
        fixture = [(entry["match"], list(entry["responses"]))
                   for entry in spec.get("patterns", [])]
        return cls(fixture, default=spec.get("default"))

    def complete(self, request: TextGenRequest) -> TextGenResponse:
        for pattern, responses in self._fixture:
            if pattern in request.prompt:
                i = self._cursor[pattern]
                self._cursor[pattern] = (i + 1) % len(responses)
                return TextGenResponse(completions=(responses[i],))
        if self._default is not None:
            return TextGenResponse(completions=(self._default,))
        raise GenerationError(f"no stub pattern matches prompt: {request.prompt[:80]}...")


class ReplayClient:
    """Replays the raw responses of a recorded run, in order, verifying
    that the prompts match."""

    def __init__(self, log: GenerationLog):
        self._records = list(log.records)
        self._next = 0

    def complete(self, request: TextGenRequest) -> TextGenResponse:
        if self._next >= len(self._records):
            raise GenerationError("replay log exhausted")
        record = self._records[self._next]
        self._next += 1
        if record.prompt != request.prompt:
            raise GenerationError(
                f"replay mismatch at record {record.index}: expected prompt "
                f"{record.prompt[:60]!r}, got {request.prompt[:60]!r}")
        if record.error is not None:
            raise GenerationError(f"recorded failure: {record.error}")
        return TextGenResponse(completions=tuple(record.raw))


class HttpTextGenClient:
    """Minimal chat-completion style HTTP client.

    POSTs ``{"model": ..., "messages": [{"role": "user", "content": ...}]}``
    with a bearer token and reads completions from
    ``choices[*].message.content``.
    """

    def __init__(self, url: str, api_key: str, timeout: float = 60.0):
        self.url = url
        self.api_key = api_key
        self.timeout = timeout

    def complete(self, request: TextGenRequest) -> TextGenResponse:
        import urllib.error
        import urllib.request

        body = json.dumps({
            "model": request.model_id,
            "messages": [{"role": "user", "content": request.prompt}],
        }).encode("utf-8")
        http_request = urllib.request.Request(
            self.url, data=body, method="POST",
            headers={"Content-Type": "application/json",
                     "Authorization": f"Bearer {self.api_key}"})
        try:
            with urllib.request.urlopen(http_request, timeout=self.timeout) as response:
                payload = json.loads(response.read().decode("utf-8"))
        except urllib.error.HTTPError as exc:
            raise GenerationError(f"endpoint returned HTTP {exc.code}") from exc
        except (urllib.error.URLError, TimeoutError, json.JSONDecodeError) as exc:
            raise GenerationError(f"endpoint unreachable: {exc}") from exc
        completions = tuple(
            choice["message"]["content"]
            for choice in payload.get("choices", [])
            if isinstance(choice.get("message", {}).get("content"), str))
        if not completions:
            raise GenerationError("endpoint response carried no completions")
        return TextGenResponse(completions=completions,
                               usage=payload.get("usage", {}))


# --- the protocol ---

Parser = Callable[[str, str, str], ParsedSentence | None]


def _located_phrases(extraction: Extraction) -> list[str]:
    """Noun phrases carrying location information ("apple on table")."""
    phrases = []
    if extraction.object_head:
        for phrase in extraction.object_modifiers:
            if phrase.prepositional:
                phrases.append(f"{extraction.object_head} {phrase.label}")
        for phrase in extraction.verb_modifiers:
            if phrase.prepositional:
                phrases.append(f"{extraction.object_head} {phrase.label}")
    return phrases


def run_collection(cfg: GenerationConfig, client: TextGenClient,
                   parser: Parser = naive_parse,
                   templates: dict[int, str] | None = None,
                   clock: Callable[[], float] | None = None,
                   sleep: Callable[[float], None] | None = None,
                   ) -> tuple[list[str], GenerationLog]:
    """Run the staged protocol; returns (corpus sentences, log).

    ``clock`` and ``sleep`` are injectable for deterministic tests; the
    defaults use wall time. Endpoint failures are retried with exponential
    backoff, then logged; the run aborts once cfg.failure_threshold prompts
    have failed outright.
    """
    templates = templates or default_templates()
    clock = clock or time.time
    sleep = sleep or time.sleep

    log = GenerationLog()
    corpus: list[str] = []
    objects: set[str] = set()
    located: set[str] = set()
    attributes: set[str] = set()
    failures = 0
    last_request_at: float | None = None

    def discover(sentence_text: str, index: int) -> None:
        parsed = parser(sentence_text, f"gen-{index}", "generated")
        if parsed is None:
            return
        for extraction in extract_phrases(parsed):
            if extraction.object_head:
                objects.add(extraction.object_head)
            for phrase in extraction.object_modifiers + extraction.verb_modifiers:
                attributes.add(phrase.label)
            located.update(_located_phrases(extraction))

    def issue(stage: int, target: str) -> None:
        nonlocal failures, last_request_at
        prompt = make_prompt(stage, target, templates)
        request = TextGenRequest(prompt=prompt, model_id=cfg.model_id)
        error: str | None = None
        response: TextGenResponse | None = None
        attempts = 0
        for attempt in range(cfg.max_retries + 1):
            if cfg.rate_limit > 0 and last_request_at is not None:
                wait = (1.0 / cfg.rate_limit) - (clock() - last_request_at)
                if wait > 0:
                    sleep(wait)
            last_request_at = clock()
            attempts += 1
            try:
                response = client.complete(request)
                error = None
                break
            except GenerationError as exc:
                error = str(exc)
                if attempt < cfg.max_retries:
                    sleep(cfg.retry_backoff * (2 ** attempt))
        index = len(log.records)
        if response is None:
            log.append(LogRecord(index=index, stage=stage, target=target,
                                 prompt=prompt, raw=[], accepted=[], rejected=[],
                                 error=error, attempts=attempts, ts=clock()))
            failures += 1
            if failures >= cfg.failure_threshold:
                raise GenerationAborted(
                    f"aborting: {failures} prompts failed (threshold "
                    f"{cfg.failure_threshold}); last error: {error}", corpus, log)
            return
        accepted, rejected = [], []
        for completion in response.completions:
            normalized = accept_completion(completion)
            if normalized is None:
                rejected.append(completion)
            else:
                accepted.append(normalized)
        log.append(LogRecord(index=index, stage=stage, target=target,
                             prompt=prompt, raw=list(response.completions),
                             accepted=accepted, rejected=rejected,
                             error=None, attempts=attempts, ts=clock()))
        for sentence_text in accepted:
            corpus.append(sentence_text)
            discover(sentence_text, index)

    seed = cfg.seed_object.strip().lower()
    for _ in range(cfg.stage1_count):
        issue(1, seed)

    stage2_targets = sorted(objects - {seed})
    for target in stage2_targets:
        for _ in range(cfg.per_item_count):
            issue(2, target)

    stage3_targets = sorted(located) if cfg.located_feedback else stage2_targets
    for target in stage3_targets:
        for _ in range(cfg.per_item_count):
            issue(3, target)

    for target in sorted(attributes):
        for _ in range(cfg.per_item_count):
            issue(4, target)

    return corpus, log


def write_corpus(sentences: Iterable[str], path: str | Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for sentence in sentences:
            fh.write(sentence)
            fh.write("\n")
            count += 1
    return count
