"""Parsed-sentence data model plus CoNLL-U and depjson corpus readers/writers.

A corpus is a stream of dependency-parsed sentences. Two on-disk formats are
supported:

* CoNLL-U: the standard 10-column TSV, blank-line separated, with
  ``# sent_id = ...`` and ``# stage = ...`` comments carrying metadata.
* depjson: this project's canonical line-delimited JSON interchange format,
  one object per line::

      {"id": ..., "stage": ..., "tokens": [{"i", "surface", "lemma", "pos",
                                            "head", "rel"}, ...]}

Lemmas are lowercased at load time; all downstream graph labels are built
from lemmas, never surface forms. Part-of-speech tags are collapsed to a
small coarse set at load time as well.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence, TextIO

log = logging.getLogger(__name__)

COARSE_POS = ("noun", "verb", "adjective", "adverb", "preposition", "other")

#: Universal POS tag -> coarse tag. Anything unlisted maps to "other".
UPOS_TO_COARSE = {
    "NOUN": "noun",
    "PROPN": "noun",
    "VERB": "verb",
    "ADJ": "adjective",
    "ADV": "adverb",
    "ADP": "preposition",
}

DEFAULT_STAGE = "external"


def coarse_pos(upos: str) -> str:
    """Collapse a Universal POS tag to the coarse tag set."""
    return UPOS_TO_COARSE.get(upos.upper(), "other")


class CorpusError(Exception):
    """A corpus file could not be read or a record was rejected in abort mode."""

    def __init__(self, message: str, path: str | Path | None = None,
                 line: int | None = None, record: int | None = None):
        self.path = str(path) if path is not None else None
        self.line = line
        self.record = record
        where = self.path or "<corpus>"
        if line is not None:
            where += f":{line}"
        if record is not None:
            where += f" (record {record})"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class CorpusIssue:
    """One skipped record: where it was and why it was rejected."""

    path: str
    record: int
    line: int
    message: str


@dataclass(frozen=True)
class Token:
    """One token of a dependency-parsed sentence.

    ``index`` is the 1-based position, ``head`` the index of the governing
    token (0 for the root) and ``relation`` the dependency label.
    """

    index: int
    surface: str
    lemma: str
    pos: str
    head: int
    relation: str


@dataclass(frozen=True)
class ParsedSentence:
    """An immutable parsed sentence; the unit of ingestion."""

    id: str
    tokens: tuple[Token, ...]
    stage: str = DEFAULT_STAGE

    def token_at(self, index: int) -> Token:
        return self.tokens[index - 1]


@dataclass(frozen=True)
class Violation:
    """A broken sentence invariant, naming the offending token and rule."""

    rule: str
    message: str
    token_index: int | None = None

    def __str__(self) -> str:
        at = f" at token {self.token_index}" if self.token_index is not None else ""
        return f"{self.rule}{at}: {self.message}"


def validate_sentence(sentence: ParsedSentence) -> list[Violation]:
    """Check all sentence invariants; an empty list means the sentence is valid.

    Rules: tokens are numbered 1..n in order, lemmas are nonempty, heads are
    in range and never self-referential, exactly one root exists, and the
    head links form a tree.
    """
    violations: list[Violation] = []
    tokens = sentence.tokens
    n = len(tokens)
    if n == 0:
        return [Violation("empty", "sentence has no tokens")]

    roots = []
    for position, tok in enumerate(tokens, start=1):
        if tok.index != position:
            violations.append(Violation(
                "index-order", f"expected index {position}, found {tok.index}", position))
        if not tok.lemma:
            violations.append(Violation("empty-lemma", "lemma is empty", position))
        if tok.pos not in COARSE_POS:
            violations.append(Violation(
                "bad-pos", f"unknown coarse tag {tok.pos!r}", position))
        if tok.head < 0 or tok.head > n:
            violations.append(Violation(
                "head-range", f"head {tok.head} outside 0..{n}", position))
            continue
        if tok.head == position:
            violations.append(Violation("self-head", "token governs itself", position))
        if tok.head == 0:
            roots.append(position)

    if not roots:
        violations.append(Violation("no-root", "no token has head 0"))
    elif len(roots) > 1:
        violations.append(Violation(
            "multiple-roots", f"tokens {roots} all have head 0", roots[1]))

    if violations:
        return violations

    # Single root, heads in range: a cycle is the only way this is not a tree.
    for position in range(1, n + 1):
        seen = set()
        cur = position
        while cur != 0:
            if cur in seen:
                violations.append(Violation(
                    "cycle", "head links loop back on themselves", position))
                return violations
            seen.add(cur)
            cur = tokens[cur - 1].head
    return violations


# --- depjson ---

def sentence_to_depjson(sentence: ParsedSentence) -> str:
    """Serialize one sentence to a canonical depjson line (no newline)."""
    payload = {
        "id": sentence.id,
        "stage": sentence.stage,
        "tokens": [
            {"i": t.index, "surface": t.surface, "lemma": t.lemma,
             "pos": t.pos, "head": t.head, "rel": t.relation}
            for t in sentence.tokens
        ],
    }
    return json.dumps(payload, ensure_ascii=False, sort_keys=True)


def sentence_from_depjson(line: str) -> ParsedSentence:
    """Parse one depjson line. Raises ValueError on malformed input."""
    obj = json.loads(line)
    if not isinstance(obj, dict) or "tokens" not in obj or "id" not in obj:
        raise ValueError("record must be an object with 'id' and 'tokens'")
    tokens = []
    for raw in obj["tokens"]:
        tokens.append(Token(
            index=int(raw["i"]),
            surface=str(raw["surface"]),
            lemma=str(raw["lemma"]).lower(),
            pos=str(raw["pos"]),
            head=int(raw["head"]),
            relation=str(raw["rel"]),
        ))
    return ParsedSentence(
        id=str(obj["id"]),
        tokens=tuple(tokens),
        stage=str(obj.get("stage", DEFAULT_STAGE)),
    )


def write_depjson(sentences: Iterable[ParsedSentence], path: str | Path) -> int:
    """Write sentences as depjson, one per line. Returns the record count."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for sentence in sentences:
            fh.write(sentence_to_depjson(sentence))
            fh.write("\n")
            count += 1
    return count


# --- CoNLL-U ---

def _conllu_sentences(fh: TextIO) -> Iterator[tuple[int, dict[str, str], list[Sequence[str]]]]:
    """Yield (first line number, metadata, raw token rows) per CoNLL-U block."""
    meta: dict[str, str] = {}
    rows: list[Sequence[str]] = []
    start = 0
    for lineno, raw in enumerate(fh, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            if rows or meta:
                yield start, meta, rows
                meta, rows = {}, []
            continue
        if not rows and not meta:
            start = lineno
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if sep:
                meta[key.strip()] = value.strip()
            continue
        rows.append(line.split("\t"))
    if rows or meta:
        yield start, meta, rows


def _parse_conllu_rows(rows: list[Sequence[str]]) -> list[Token]:
    tokens = []
    for row in rows:
        if len(row) != 10:
            raise ValueError(f"expected 10 columns, found {len(row)}")
        token_id = row[0]
        if "-" in token_id or "." in token_id:
            continue  # multiword ranges and empty nodes carry no tree structure
        form, lemma, upos = row[1], row[2], row[3]
        if lemma == "_":
            lemma = form
        head, deprel = row[6], row[7]
        tokens.append(Token(
            index=int(token_id),
            surface=form,
            lemma=lemma.lower(),
            pos=coarse_pos(upos),
            head=int(head),
            relation=deprel,
        ))
    return tokens


# --- unified loader ---

FORMATS = ("conllu", "depjson")

_SUFFIX_FORMATS = {".conllu": "conllu", ".conll": "conllu",
                   ".depjson": "depjson", ".jsonl": "depjson"}


def detect_format(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    try:
        return _SUFFIX_FORMATS[suffix]
    except KeyError:
        raise CorpusError(f"cannot infer corpus format from suffix {suffix!r}; "
                          f"pass one of {FORMATS}", path=path) from None


def load_corpus(path: str | Path, format: str | None = None, *,
                errors: str = "skip",
                report: list[CorpusIssue] | None = None) -> Iterator[ParsedSentence]:
    """Stream validated sentences from a corpus file, in file order.

    Malformed records are skipped and reported (logged, and appended to
    ``report`` when given) unless ``errors="abort"``, which raises
    CorpusError at the first bad record. Every yielded sentence passes
    :func:`validate_sentence`.
    """
    if errors not in ("skip", "abort"):
        raise ValueError(f"errors must be 'skip' or 'abort', not {errors!r}")
    fmt = format or detect_format(path)
    if fmt not in FORMATS:
        raise CorpusError(f"unknown format {fmt!r}; expected one of {FORMATS}", path=path)
    path = Path(path)
    if not path.is_file():
        raise CorpusError("file does not exist or is not readable", path=path)

    def reject(message: str, line: int, record: int) -> None:
        if errors == "abort":
            raise CorpusError(message, path=path, line=line, record=record)
        issue = CorpusIssue(path=str(path), record=record, line=line, message=message)
        if report is not None:
            report.append(issue)
        log.warning("skipping record %d at %s:%d: %s", record, path, line, message)

    with open(path, encoding="utf-8") as fh:
        if fmt == "depjson":
            record = 0
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                record += 1
                try:
                    sentence = sentence_from_depjson(line)
                except (ValueError, KeyError, TypeError) as exc:
                    reject(f"malformed depjson record: {exc}", lineno, record)
                    continue
                violations = validate_sentence(sentence)
                if violations:
                    reject("; ".join(str(v) for v in violations), lineno, record)
                    continue
                yield sentence
        else:
            record = 0
            for start, meta, rows in _conllu_sentences(fh):
                if not rows:
                    continue
                record += 1
                try:
                    tokens = _parse_conllu_rows(rows)
                except ValueError as exc:
                    reject(f"malformed CoNLL-U record: {exc}", start, record)
                    continue
                sentence = ParsedSentence(
                    id=meta.get("sent_id", f"s{record}"),
                    tokens=tuple(tokens),
                    stage=meta.get("stage", DEFAULT_STAGE),
                )
                violations = validate_sentence(sentence)
                if violations:
                    reject("; ".join(str(v) for v in violations), start, record)
                    continue
                yield sentence
