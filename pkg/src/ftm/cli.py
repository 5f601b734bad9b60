"""Command-line interface.

Subcommands: ``match`` aligns two graphs and writes mapping TSVs plus a run
report; ``diverge`` classifies outbound triple pairs of matched entities;
``eval`` scores predictions against a gold standard; ``stats`` prints
per-predicate statistics; ``build-triple-gold`` derives a triple-level
dataset from an entity gold standard.

Exit codes: 0 on success, 2 for usage/config/input problems, 1 for
internal errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

from . import evaluation, reports
from .config import RunConfig, load_config
from .embedding import (LocalTrigramProvider, RemoteConfig, RemoteProvider)
from .errors import ConfigError, ContractViolationError, FtmError
from .ingest import FileSource, load_graph
from .labels import build_label_mappings
from .matcher import compute_divergences, run_pipeline
from .rdf import format_term
from .snapshot import load_snapshot
from .sparql import EndpointSource

_CONFIG_KEYS = ", ".join(f.name for f in dataclasses.fields(RunConfig))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ftm",
        description="Align entities and triples across two RDF knowledge graphs.",
        epilog=f"Config file keys (JSON object, unknown keys rejected): {_CONFIG_KEYS}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p: argparse.ArgumentParser) -> None:
        p.add_argument("--source", help="left graph: file path or endpoint URL")
        p.add_argument("--target", help="right graph: file path or endpoint URL")
        p.add_argument("--format", choices=["ntriples", "turtle", "snapshot"],
                       help="file format override (default: by extension)")
        p.add_argument("--endpoint", action="store_true", default=None,
                       help="treat --source/--target as SPARQL endpoints")
        p.add_argument("--page-size", type=int, dest="page_size",
                       help="endpoint page size (default 10000)")
        p.add_argument("--config", help="JSON config file")

    def add_run(p: argparse.ArgumentParser) -> None:
        add_io(p)
        p.add_argument("--embedder", choices=["local", "remote"],
                       help="embedding provider (default local)")
        p.add_argument("--embedder-url", dest="embedder_url",
                       help="base URL of the remote embedding service")
        p.add_argument("--threshold", type=float,
                       help="entity mapping threshold (default 0.90)")
        p.add_argument("--k-top", type=int, dest="k_top",
                       help="entity pairs explored per source (default 10)")
        p.add_argument("--max-iters", type=int, dest="max_iters",
                       help="iteration cap (default 10)")
        p.add_argument("--seed", type=int, help="embedding hash seed (default 0)")
        p.add_argument("--threads", type=int,
                       help="worker threads; never changes results (default 1)")
        p.add_argument("--output-dir", dest="output_dir",
                       help="directory for output artifacts (default out)")

    p_match = sub.add_parser("match", help="align two graphs")
    add_run(p_match)

    p_div = sub.add_parser("diverge", help="classify triple pairs of matched entities")
    add_run(p_div)
    p_div.add_argument("--mappings", help="entity mappings TSV "
                       "(default <output-dir>/entity_mappings.tsv)")

    p_eval = sub.add_parser("eval", help="score predictions against a gold standard")
    p_eval.add_argument("--predictions", required=True,
                        help="entity mappings TSV to evaluate")
    p_eval.add_argument("--gold", required=True,
                        help="gold standard (TSV or alignment XML)")
    p_eval.add_argument("--threshold", type=float, default=0.90)
    p_eval.add_argument("--sweep", action="store_true",
                        help="sweep thresholds in steps of 0.01 and report the best")
    p_eval.add_argument("--report", help="write the JSON report here as well")

    p_stats = sub.add_parser("stats", help="print per-predicate statistics")
    add_io(p_stats)

    p_gold = sub.add_parser("build-triple-gold",
                            help="derive triple-level gold from entity gold")
    add_io(p_gold)
    p_gold.add_argument("--gold", required=True, help="entity gold standard")
    p_gold.add_argument("--min-functionality", type=float, default=0.8,
                        dest="min_functionality")
    p_gold.add_argument("--output", required=True, help="output TSV path")

    return parser


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    for name in ("source", "target", "format", "endpoint", "page_size", "embedder",
                 "embedder_url", "threshold", "k_top", "max_iters", "seed",
                 "threads", "output_dir"):
        value = getattr(args, name, None)
        if value is not None:
            config = dataclasses.replace(config, **{name: value})
    return config.validate()


def _graph_source(value: str, config: RunConfig):
    if config.endpoint or value.startswith(("http://", "https://")):
        return EndpointSource(value, page_size=config.page_size)
    return FileSource(value, format=config.format)


def _load_side(which: str, value: str | None, config: RunConfig):
    if not value:
        raise ConfigError(f"--{which} is required")
    source = _graph_source(value, config)
    if isinstance(source, FileSource):
        if not Path(value).exists():
            raise FtmError(f"{which} file not found: {value}")
        if config.format == "snapshot" or Path(value).suffix in (".snap", ".ftmsnap"):
            return load_snapshot(value)
    return load_graph(source)


def _make_embedder(config: RunConfig):
    if config.embedder == "remote":
        provider = RemoteProvider(RemoteConfig(base_url=config.embedder_url))
        provider.health()
        return provider
    return LocalTrigramProvider(dimension=config.embedding_dimension,
                                seed=config.seed)


def _prepare(args: argparse.Namespace):
    config = _resolve_config(args)
    graph1 = _load_side("source", config.source, config)
    graph2 = _load_side("target", config.target, config)
    embedder = _make_embedder(config)
    return config, graph1, graph2, embedder


def cmd_match(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config, graph1, graph2, embedder = _prepare(args)
    mappings = build_label_mappings(graph1, graph2, embedder=embedder,
                                    cross_limit=config.cross_limit,
                                    floor=config.label_floor)
    result = run_pipeline(graph1, graph2, mappings, config, embedder=embedder)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports.write_entity_mappings(str(out / "entity_mappings.tsv"),
                                  result.entity_mappings)
    reports.write_triple_mappings(str(out / "triple_mappings.tsv"),
                                  result.triple_mappings.values(), graph1, graph2)
    reports.write_run_report(str(out / "run_report.json"), result, graph1, graph2,
                             config, time.perf_counter() - started)
    above = sum(1 for m in result.entity_mappings.values()
                if m.combined >= config.threshold)
    print(f"entity mappings: {len(result.entity_mappings)}"
          f" ({above} at or above {config.threshold:g})")
    print(f"triple mappings: {len(result.triple_mappings)}")
    print(f"iterations: {len(result.history)} ({result.stop_reason})")
    print(f"wrote {out / 'entity_mappings.tsv'}, {out / 'triple_mappings.tsv'},"
          f" {out / 'run_report.json'}")
    return 0


def cmd_diverge(args: argparse.Namespace) -> int:
    config, graph1, graph2, embedder = _prepare(args)
    mappings_path = args.mappings or str(Path(config.output_dir) / "entity_mappings.tsv")
    if not Path(mappings_path).exists():
        raise FtmError(f"entity mappings not found: {mappings_path};"
                       f" run 'ftm match' first or pass --mappings")
    entity_mappings = reports.read_entity_mappings(mappings_path)
    label_mappings = build_label_mappings(graph1, graph2, embedder=embedder,
                                          cross_limit=config.cross_limit,
                                          floor=config.label_floor)
    divergences = compute_divergences(graph1, graph2, entity_mappings,
                                      label_mappings.predicates, config)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports.write_triple_mappings(str(out / "divergences.tsv"), divergences,
                                  graph1, graph2)
    counts = {"Compatible": 0, "Divergent": 0, "Undecided": 0}
    for mapping in divergences:
        counts[mapping.classification.value] += 1
    print(f"classified {len(divergences)} triple pairs: "
          f"{counts['Compatible']} compatible, {counts['Divergent']} divergent, "
          f"{counts['Undecided']} undecided")
    print(f"wrote {out / 'divergences.tsv'}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    predictions = reports.read_entity_mappings(args.predictions)
    gold = evaluation.load_gold(args.gold)
    if not gold.pairs:
        raise FtmError(f"gold standard {args.gold!r} holds no pairs")
    scores = {key: m.combined for key, m in predictions.items()}
    ranked = evaluation.rank_targets(scores)
    if args.sweep:
        sweep = evaluation.threshold_sweep(scores, gold)
        report = sweep.best_report
        report.flags.append(f"swept-best-threshold={sweep.best_threshold:.2f}")
    else:
        report = evaluation.prf_one_to_one(scores, gold, args.threshold)
    for k in (1, 5, 10):
        report.hits[k] = evaluation.hit_at_k(ranked, gold, k)
    payload = report.as_dict()
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    graph = _load_side("source", config.source, config)
    print(reports.format_stats_table(graph))
    return 0


def cmd_build_triple_gold(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    graph1 = _load_side("source", config.source, config)
    graph2 = _load_side("target", config.target, config)
    gold = evaluation.load_gold(args.gold)
    if not gold.pairs:
        raise FtmError(f"gold standard {args.gold!r} holds no pairs")
    rows = evaluation.build_triple_dataset(graph1, graph2, gold,
                                           args.min_functionality)
    with open(args.output, "w", encoding="utf-8") as handle:
        for row in rows:
            t1 = graph1.triples[row.left_id]
            t2 = graph2.triples[row.right_id]
            handle.write("\t".join((
                t1.subject, t1.predicate, format_term(t1.object),
                t2.subject, t2.predicate, format_term(t2.object),
                row.label.value)) + "\n")
    print(f"wrote {len(rows)} labelled triple pairs to {args.output}")
    return 0


_COMMANDS = {
    "match": cmd_match,
    "diverge": cmd_diverge,
    "eval": cmd_eval,
    "stats": cmd_stats,
    "build-triple-gold": cmd_build_triple_gold,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ContractViolationError as exc:
        print(f"error [internal]: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error [config]: {exc}", file=sys.stderr)
        return 2
    except FtmError as exc:
        print(f"error [input]: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error [input]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
