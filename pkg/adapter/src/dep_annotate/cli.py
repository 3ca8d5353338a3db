"""annotate: batch-parse raw sentences into depjson records.

    annotate --in sentences.txt --out parsed.depjson --stage stage1
    annotate --verify parsed.depjson

Exit codes: 0 success, 1 operational failure (unreachable backend,
missing input, schema violations in --verify), 2 usage error.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .annotate import AdapterConfig, annotate, verify_schema
from .backends import BACKENDS, BackendUnavailable, get_backend

CORENLP_URL_ENV = "CORENLP_URL"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="annotate",
        description="Dependency-annotate raw sentences into line-delimited "
                    "depjson records.")
    parser.add_argument("--in", dest="input", metavar="FILE",
                        help="input file, one sentence per line")
    parser.add_argument("--out", dest="output", metavar="FILE",
                        help="depjson output file")
    parser.add_argument("--stage", default="external",
                        help="provenance tag stamped on every record")
    parser.add_argument("--backend", choices=BACKENDS, default="builtin")
    parser.add_argument("--corenlp-url", default=None,
                        help=f"CoreNLP server URL (default: ${CORENLP_URL_ENV})")
    parser.add_argument("--verify", metavar="FILE",
                        help="validate an existing depjson file instead of "
                             "annotating")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.verify:
        if args.input or args.output:
            parser.error("--verify cannot be combined with --in/--out")
        if not Path(args.verify).is_file():
            print(f"error: no such file: {args.verify}", file=sys.stderr)
            return 1
        report = verify_schema(args.verify)
        for violation in report.violations:
            print(f"{args.verify}: {violation}", file=sys.stderr)
        print(f"{report.records} records, {len(report.violations)} violations")
        return 0 if report.ok else 1

    if not args.input or not args.output:
        parser.error("--in and --out are required (or use --verify)")
    if not Path(args.input).is_file():
        print(f"error: no such file: {args.input}", file=sys.stderr)
        return 1

    try:
        backend = get_backend(
            args.backend,
            corenlp_url=args.corenlp_url or os.environ.get(CORENLP_URL_ENV))
        summary = annotate(AdapterConfig(
            input=Path(args.input), output=Path(args.output),
            backend=backend, stage=args.stage))
    except BackendUnavailable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for lineno, text in summary.failures:
        print(f"warning: line {lineno} skipped: {text[:60]}", file=sys.stderr)
    print(f"annotated {summary.parsed} sentences, {summary.failed} failed "
          f"-> {args.output}")
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
