"""Command-line entry point: generate, ingest, build, merge, query, eval, stats.

Exit codes: 0 success, 1 operational error (missing/bad data), 2 usage
error (bad flags or arguments). Outputs are deterministic for identical
inputs so pipeline steps can be content-compared.
"""
from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from pathlib import Path

from . import __version__
from .builder import build_graph_parallel
from .corpus import CorpusError, CorpusIssue, load_corpus, write_depjson
from .engine import (AffordanceResult, Observation, QueryConfig,
                     UnknownFactorError, acquired, query)
from .evaluation import (ResponseFormatError, SkippedPhrase, coverage_score,
                         load_rankings, load_responses, rank_distance,
                         weighted_coverage)
from .generation import (GenerationAborted, GenerationConfig, GenerationError,
                         HttpTextGenClient, StubClient, load_templates,
                         run_collection, write_corpus)
from .store import (GraphFormatError, GraphInvariantError, GraphMergeError,
                    load, merge, save, stats)

ENDPOINT_ENV = "AFFORDNET_ENDPOINT"
API_KEY_ENV = "AFFORDNET_API_KEY"


class OperationalError(Exception):
    """Data-level failure: reported on stderr, exit code 1."""


def _factor(text: str) -> tuple:
    try:
        observation = Observation.parse([text])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    return observation.factors[0]


def _existing(path: str) -> Path:
    # existence is a data problem (exit 1), checked before any work begins
    p = Path(path)
    if not p.is_file():
        raise OperationalError(f"no such file: {p}")
    return p


def _query_config(args: argparse.Namespace, top_k: int | None = None) -> QueryConfig:
    try:
        return QueryConfig(decay=args.decay, penalty=args.penalty,
                           threshold=args.threshold,
                           top_k=top_k if top_k is not None else args.top_k)
    except ValueError as exc:
        raise OperationalError(str(exc))


def _format_value(value: float, records: bool) -> str:
    return repr(value) if records else f"{value:.6g}"


def _factor_key(factor: tuple) -> str:
    kind, label = factor
    return f"{kind.value}:{label}"


def _report_issues(issues: list[CorpusIssue]) -> None:
    for issue in issues:
        print(f"warning: {issue.path}:{issue.line} record {issue.record}: "
              f"{issue.message}", file=sys.stderr)


# --- subcommands ---

def cmd_ingest(args: argparse.Namespace) -> int:
    paths = [_existing(p) for p in args.corpora]
    issues: list[CorpusIssue] = []
    sentences = []
    for path in paths:
        sentences.extend(load_corpus(path, format=args.format,
                                     errors=args.errors, report=issues))
    _report_issues(issues)
    count = write_depjson(sentences, args.out)
    print(f"ingested {count} sentences "
          f"({len(issues)} skipped) -> {args.out}")
    return 0


def _load_all_sentences(args: argparse.Namespace) -> list:
    sentences = []
    issues: list[CorpusIssue] = []
    for path in [_existing(p) for p in args.corpora]:
        sentences.extend(load_corpus(path, format=args.format,
                                     errors=args.errors, report=issues))
    _report_issues(issues)
    return sentences


def cmd_build(args: argparse.Namespace) -> int:
    sentences = _load_all_sentences(args)
    meta = {"corpora": sorted({Path(p).name for p in args.corpora}),
            "builder": f"affordnet {__version__}"}
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        meta["built_at"] = epoch
    graph = build_graph_parallel(sentences, jobs=args.jobs, meta=meta)
    save(graph, args.out)
    summary = stats(graph)
    print(f"built {summary.node_count} nodes / {summary.edge_count} edges "
          f"from {len(sentences)} sentences -> {args.out}")
    return 0


def cmd_merge(args: argparse.Namespace) -> int:
    graphs = [load(_existing(p)) for p in args.graphs]
    merged = graphs[0]
    for graph in graphs[1:]:
        merged = merge(merged, graph)
    save(merged, args.out)
    print(f"merged {len(graphs)} graphs -> {args.out}")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    summary = stats(load(_existing(args.graph)))
    if args.format == "records":
        print(json.dumps({
            "nodes_by_kind": summary.nodes_by_kind,
            "node_count": summary.node_count,
            "edge_count": summary.edge_count,
            "max_count": summary.max_count,
            "degree_histogram": {str(k): v for k, v in summary.degree_histogram.items()},
        }, sort_keys=True))
        return 0
    for kind, count in sorted(summary.nodes_by_kind.items()):
        print(f"{kind} nodes\t{count}")
    print(f"edges\t{summary.edge_count}")
    print(f"max count\t{summary.max_count}")
    print("degree\tnodes")
    for degree, count in summary.degree_histogram.items():
        print(f"{degree}\t{count}")
    return 0


def _print_results(results: list[AffordanceResult], records: bool) -> None:
    if records:
        for r in results:
            print(json.dumps({
                "action": r.action,
                "value": r.value,
                "per_factor": {_factor_key(f): v for f, v in r.per_factor.items()},
            }, sort_keys=True))
        return
    if not results:
        print("(no actions reachable from the observed factors)")
        return
    width = max(len(r.action) for r in results)
    print(f"{'action':<{width}}\tvalue\tper-factor")
    for r in results:
        breakdown = " ".join(
            f"{_factor_key(f)}={_format_value(v, False)}"
            for f, v in sorted(r.per_factor.items()))
        print(f"{r.action:<{width}}\t{_format_value(r.value, False)}\t{breakdown}")


def read_result_records(path: str | Path) -> list[AffordanceResult]:
    """Load `query --format records` output back into result values."""
    results = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            per_factor = {Observation.parse([key]).factors[0]: float(v)
                          for key, v in obj["per_factor"].items()}
            results.append(AffordanceResult(
                action=str(obj["action"]), value=float(obj["value"]),
                per_factor=per_factor))
    return results


def cmd_query(args: argparse.Namespace) -> int:
    graph = load(_existing(args.graph))
    cfg = _query_config(args)
    try:
        observation = Observation(tuple(args.observe))
    except ValueError as exc:
        raise OperationalError(str(exc))
    try:
        results = query(graph, observation, cfg)
    except UnknownFactorError as exc:
        raise OperationalError(str(exc))
    if args.acquired_only:
        results = acquired(results, cfg)
    _print_results(results, args.format == "records")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    graph = load(_existing(args.graph))
    path = _existing(args.responses)
    loader = load_responses if args.mode == "coverage" else load_rankings
    try:
        responses = loader(path)
    except ResponseFormatError as exc:
        raise OperationalError(str(exc))
    if not responses:
        raise OperationalError(f"{path}: no records")

    wanted = tuple(args.situation) if args.situation else None
    situations = []
    for response in responses:
        if response.situation.factors not in situations:
            situations.append(response.situation.factors)
    if wanted is not None:
        situations = [s for s in situations if s == wanted]
        if not situations:
            raise OperationalError("no responses match the requested situation")

    records = args.format == "records"
    if not records:
        print("situation\tmetric\tvalue")
    for factors in situations:
        observation = Observation(factors)
        matching = [r for r in responses if r.situation.factors == factors]
        situation_key = "+".join(_factor_key(f) for f in factors)

        def emit(metric: str, value: float) -> None:
            if records:
                print(json.dumps({"situation": situation_key, "metric": metric,
                                  "value": value}, sort_keys=True))
            else:
                print(f"{situation_key}\t{metric}\t{_format_value(value, False)}")

        if args.mode == "coverage":
            cfg = _query_config(args, top_k=sum(1 for _ in graph.actions()) or 1)
            try:
                results = acquired(query(graph, observation, cfg), cfg)
            except UnknownFactorError as exc:
                raise OperationalError(str(exc))
            labels = {r.action for r in results}
            report: list[SkippedPhrase] = []
            try:
                emit("coverage", coverage_score(matching, labels, report))
                emit("weighted_coverage", weighted_coverage(matching, labels, report))
            except ValueError as exc:
                raise OperationalError(str(exc))
            for skipped in report:
                print(f"warning: skipped phrase {skipped.phrase!r} from "
                      f"{skipped.respondent}: {skipped.reason}", file=sys.stderr)
        else:
            cfg = _query_config(args, top_k=5)
            try:
                results = query(graph, observation, cfg)
            except UnknownFactorError as exc:
                raise OperationalError(str(exc))
            system_top = [r.action for r in results]
            try:
                emit("rank_distance", rank_distance(system_top, matching))
            except ValueError as exc:
                raise OperationalError(str(exc))
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        cfg = GenerationConfig.from_file(_existing(args.config))
    except ValueError as exc:
        raise OperationalError(str(exc))
    templates = load_templates(args.templates) if args.templates else None

    if args.stub:
        client = StubClient.from_file(_existing(args.stub))
        # offline runs use a counting clock so reruns are byte-identical
        counter = itertools.count()
        clock = lambda: float(next(counter))
        sleep = lambda seconds: None
    else:
        endpoint = os.environ.get(ENDPOINT_ENV)
        api_key = os.environ.get(API_KEY_ENV)
        missing = [name for name, value in
                   ((ENDPOINT_ENV, endpoint), (API_KEY_ENV, api_key)) if not value]
        if missing:
            print(f"usage error: --live requires environment variable(s) "
                  f"{', '.join(missing)}", file=sys.stderr)
            return 2
        client = HttpTextGenClient(endpoint, api_key)
        clock = None
        sleep = None

    log_path = args.log or f"{args.out}.log.jsonl"
    try:
        corpus, log = run_collection(cfg, client, templates=templates,
                                     clock=clock, sleep=sleep)
    except GenerationAborted as exc:
        exc.log.write(log_path)
        write_corpus(exc.corpus, args.out)
        raise OperationalError(str(exc))
    except GenerationError as exc:
        raise OperationalError(str(exc))
    log.write(log_path)
    count = write_corpus(corpus, args.out)
    print(f"collected {count} sentences over {log.request_count()} requests "
          f"-> {args.out} (log: {log_path})")
    return 0


# --- parser wiring ---

def _add_query_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--decay", type=float, default=QueryConfig().decay)
    sub.add_argument("--penalty", type=float, default=QueryConfig().penalty)
    sub.add_argument("--threshold", type=float, default=QueryConfig().threshold)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="affordnet",
        description="Build an affordance network from parsed sentences and "
                    "query which actions a situation recalls.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate corpora and write canonical depjson")
    p.add_argument("corpora", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("conllu", "depjson"), default=None)
    p.add_argument("--errors", choices=("skip", "abort"), default="skip")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build", help="build a graph file from parsed corpora")
    p.add_argument("corpora", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("conllu", "depjson"), default=None)
    p.add_argument("--errors", choices=("skip", "abort"), default="skip")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("merge", help="merge graph files (counts add)")
    p.add_argument("graphs", nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("stats", help="summarize a graph file")
    p.add_argument("graph")
    p.add_argument("--format", choices=("table", "records"), default="table")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("query", help="rank recalled actions for observed factors")
    p.add_argument("graph")
    p.add_argument("--observe", action="append", required=True, type=_factor,
                   metavar="KIND:LABEL", help="observed factor, repeatable "
                   "(kinds: object, attribute)")
    _add_query_flags(p)
    p.add_argument("--top-k", type=int, default=QueryConfig().top_k)
    p.add_argument("--acquired-only", action="store_true",
                   help="keep only values at or below the threshold")
    p.add_argument("--format", choices=("table", "records"), default="table")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("eval", help="score the graph against human responses")
    p.add_argument("graph")
    p.add_argument("responses")
    p.add_argument("--mode", choices=("coverage", "rank"), default="coverage")
    p.add_argument("--situation", action="append", type=_factor,
                   metavar="KIND:LABEL", help="restrict to one situation "
                   "(repeat the flag per factor)")
    _add_query_flags(p)
    p.add_argument("--format", choices=("table", "records"), default="table")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("generate", help="collect a raw corpus from a "
                       "text-generation endpoint")
    p.add_argument("config", help="key = value generation config file")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--live", action="store_true",
                       help=f"use the endpoint named by ${ENDPOINT_ENV} / "
                            f"${API_KEY_ENV}")
    group.add_argument("--stub", metavar="FIXTURE",
                       help="deterministic offline client from a JSON fixture")
    p.add_argument("--out", required=True)
    p.add_argument("--log", default=None,
                   help="log path (default: <out>.log.jsonl)")
    p.add_argument("--templates", default=None,
                   help="directory with stage1.txt..stage4.txt overrides")
    p.set_defaults(func=cmd_generate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OperationalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (CorpusError, GraphFormatError, GraphInvariantError,
            GraphMergeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
