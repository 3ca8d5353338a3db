"""Batch annotation and depjson schema verification.

Input: one raw sentence per line. Output: one depjson record per parsed
sentence, in input order:

    {"id": ..., "stage": ..., "tokens": [{"i", "surface", "lemma", "pos",
                                          "head", "rel"}, ...]}

Sentences the backend cannot parse are counted and logged, never emitted,
so every emitted record satisfies the schema checked by verify_schema.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .backends import COARSE_DEFAULT, UPOS_TO_COARSE

log = logging.getLogger(__name__)

COARSE_TAGS = tuple(sorted(set(UPOS_TO_COARSE.values()) | {COARSE_DEFAULT}))

TOKEN_FIELDS = {"i": int, "surface": str, "lemma": str, "pos": str,
                "head": int, "rel": str}


@dataclass
class AdapterConfig:
    input: Path
    output: Path
    backend: object  # anything with .parse(text) -> list[dict] | None
    stage: str = "external"


@dataclass
class Summary:
    parsed: int = 0
    failed: int = 0
    failures: list[tuple[int, str]] = field(default_factory=list)  # (line, text)


def annotate(cfg: AdapterConfig) -> Summary:
    """Annotate every input line; returns parsed/failed counts."""
    if not Path(cfg.input).is_file():
        raise FileNotFoundError(f"input file does not exist: {cfg.input}")
    summary = Summary()
    with open(cfg.input, encoding="utf-8", errors="replace") as src, \
            open(cfg.output, "w", encoding="utf-8") as dst:
        for lineno, line in enumerate(src, start=1):
            text = line.strip()
            if not text:
                continue
            tokens = cfg.backend.parse(text)
            if tokens is None:
                summary.failed += 1
                summary.failures.append((lineno, text))
                log.warning("line %d not parseable: %s", lineno, text[:60])
                continue
            summary.parsed += 1
            record = {"id": f"{cfg.stage}-{lineno}", "stage": cfg.stage,
                      "tokens": tokens}
            dst.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            dst.write("\n")
    return summary


@dataclass(frozen=True)
class SchemaViolation:
    record: int
    message: str

    def __str__(self) -> str:
        return f"record {self.record}: {self.message}"


@dataclass
class VerifyReport:
    records: int = 0
    violations: list[SchemaViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _check_tokens(tokens: list) -> list[str]:
    problems = []
    n = len(tokens)
    if n == 0:
        return ["no tokens"]
    roots = 0
    for position, tok in enumerate(tokens, start=1):
        if not isinstance(tok, dict):
            return [f"token {position} is not an object"]
        for name, kind in TOKEN_FIELDS.items():
            if name not in tok:
                problems.append(f"token {position} missing field {name!r}")
            elif not isinstance(tok[name], kind) or isinstance(tok[name], bool):
                problems.append(f"token {position} field {name!r} has wrong type")
        if problems:
            continue
        if tok["i"] != position:
            problems.append(f"token {position} has index {tok['i']}")
        if not tok["lemma"]:
            problems.append(f"token {position} has empty lemma")
        if tok["lemma"] != tok["lemma"].lower():
            problems.append(f"token {position} lemma not lowercase")
        if tok["pos"] not in COARSE_TAGS:
            problems.append(f"token {position} has unknown pos {tok['pos']!r}")
        if not 0 <= tok["head"] <= n:
            problems.append(f"token {position} head {tok['head']} out of range")
        elif tok["head"] == position:
            problems.append(f"token {position} is its own head")
        if tok["head"] == 0:
            roots += 1
    if problems:
        return problems
    if roots != 1:
        problems.append(f"expected exactly one root, found {roots}")
        return problems
    for position in range(1, n + 1):
        seen = set()
        cursor = position
        while cursor != 0:
            if cursor in seen:
                return [f"token {position} is on a head cycle"]
            seen.add(cursor)
            cursor = tokens[cursor - 1]["head"]
    return problems


def verify_schema(path: str | Path) -> VerifyReport:
    """Validate every record in a depjson file; report-valued."""
    report = VerifyReport()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            report.records += 1
            record_no = report.records
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                report.violations.append(SchemaViolation(record_no, f"bad JSON: {exc}"))
                continue
            if not isinstance(obj, dict):
                report.violations.append(SchemaViolation(record_no, "not an object"))
                continue
            if not isinstance(obj.get("id"), str) or not obj.get("id"):
                report.violations.append(SchemaViolation(record_no, "missing or empty 'id'"))
            if "stage" in obj and not isinstance(obj["stage"], str):
                report.violations.append(SchemaViolation(record_no, "'stage' not a string"))
            tokens = obj.get("tokens")
            if not isinstance(tokens, list):
                report.violations.append(SchemaViolation(record_no, "'tokens' not a list"))
                continue
            for problem in _check_tokens(tokens):
                report.violations.append(SchemaViolation(record_no, problem))
    return report
