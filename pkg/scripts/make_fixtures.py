#!/usr/bin/env python3
"""Regenerate the committed test fixtures.

The themed corpus is a small, hand-tuned sentence collection whose edge
counts make the expected rank-1 actions unambiguous for the situational
queries exercised by the tests (store -> buy, knife -> slice/cut,
friend -> share, pencil -> sketch via "with pencil"). Counts per template
are part of the contract; change them only together with the tests.

Usage: python3 scripts/make_fixtures.py
"""
from __future__ import annotations

import json
from pathlib import Path

from affordnet.corpus import write_depjson
from affordnet.generation import naive_parse

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

# (sentence, repetitions)
THEMED_SENTENCES = [
    ("I buy the apple at the store.", 6),
    ("I find the apple at the store.", 2),
    ("I see the apple at the store.", 1),
    ("I compare the apple at the store.", 1),
    ("I choose the apple at the store.", 1),
    ("I pick the apple in the tree.", 4),
    ("I find the apple in the tree.", 1),
    ("I photograph the apple in the tree.", 1),
    ("I share the apple with the friend.", 5),
    ("I trade the apple with the friend.", 2),
    ("I enjoy the apple with the friend.", 1),
    ("I slice the apple with the knife.", 5),
    ("I cut the apple with the knife.", 2),
    ("I peel the apple with the knife.", 2),
    ("I sketch the apple with the pencil.", 3),
    ("I draw the picture with the pencil.", 2),
    ("I photograph the apple with the camera.", 3),
    ("I take the photo with the camera.", 2),
    ("I eat the apple.", 4),
    ("I wash the apple.", 2),
    ("I toss the apple.", 1),
    ("I use the apple.", 2),
    ("I place the apple.", 2),
    ("I taste the sweet apple.", 2),
    ("I pick the fall apple.", 2),
]

STUB_GENERATION = {
    "patterns": [
        {"match": '"apple" as its direct object',
         "responses": ["I eat the apple.", "I slice the pear.", "I wash the plum."]},
        {"match": 'about "pear"',
         "responses": ["I place the pear on the table."]},
        {"match": 'about "plum"',
         "responses": ["I put the plum on the table."]},
        {"match": 'object is "pear on table"',
         "responses": ["I grab the pear on the table."]},
        {"match": 'object is "plum on table"',
         "responses": ["I lift the plum on the table."]},
        {"match": 'involving "on table"',
         "responses": ["I keep the fruit on the table."]},
    ]
}

APPLE_SITUATION = [{"kind": "object", "label": "apple"}]

COVERAGE_RESPONSES = [
    {"respondent": "r1", "situation": APPLE_SITUATION,
     "actions": ["eat the apple", "slicing the apples", "juggle the oranges"]},
    {"respondent": "r2", "situation": APPLE_SITUATION,
     "actions": ["eat apple", "buying apples"]},
]

# system top-5 for {object:apple} on the themed corpus, by count then label
APPLE_TOP5 = ["buy apple", "pick apple", "share apple", "slice apple", "eat apple"]

RANK_RESPONSES = [
    {"respondent": "r1", "situation": APPLE_SITUATION, "ordering": APPLE_TOP5},
    {"respondent": "r2", "situation": APPLE_SITUATION,
     "ordering": list(reversed(APPLE_TOP5))},
]


def themed_corpus():
    sentences = []
    n = 0
    for text, repetitions in THEMED_SENTENCES:
        for _ in range(repetitions):
            n += 1
            parsed = naive_parse(text, sent_id=f"t{n:03d}", stage="fixture")
            if parsed is None:
                raise SystemExit(f"template did not parse: {text!r}")
            sentences.append(parsed)
    return sentences


def write_jsonl(records, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    count = write_depjson(themed_corpus(), FIXTURES / "themed_corpus.depjson")
    print(f"themed_corpus.depjson: {count} sentences")
    (FIXTURES / "stub_generation.json").write_text(
        json.dumps(STUB_GENERATION, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8")
    write_jsonl(COVERAGE_RESPONSES, FIXTURES / "responses_coverage.jsonl")
    write_jsonl(RANK_RESPONSES, FIXTURES / "responses_rank.jsonl")
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
