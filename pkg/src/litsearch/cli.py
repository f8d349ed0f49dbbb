"""Command-line entry points.

Subcommands:

    index   build one granularity's index snapshot from a corpus file
    run     produce a TREC run for a topic set (fusion1, fusion2, monot5,
            duot5, t5_lr)
    eval    score a run against qrels; text/JSONL report plus optional
            figures
    fuse    reciprocal-rank-fuse arbitrary run files
    serve   start the interactive search service

Exit codes: 0 success, 1 usage error, 2 data error, 3 scorer failure.
Identical inputs always produce identical outputs; run files carry no
timestamps.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .corpus import GRANULARITIES, generate_all_units, load_corpus
from .errors import LitsearchError, ScorerError, SingleClassError
from .feedback import (
    Qrels,
    classifier_features,
    classify_interpolate,
    parse_qrels,
    residual_filter,
    train_classifier,
)
from .fusion import DEFAULT_DEPTH, DEFAULT_K_RRF, fusion_run, rrf
from .index import InvertedIndex, build_index, load_index, save_index
from .ranking import RankedList
from .rerank import (
    DEFAULT_MAX_TOKENS,
    DEFAULT_RERANK_DEPTH,
    pairwise_rerank,
    pointwise_rerank,
)
from .scorer import make_scorer
from .topics import DEFAULT_THETA, Topic, parse_topics
from .treceval import METRIC_NAMES, RunFile, evaluate, parse_run, write_run

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_SCORER = 3

RUN_VARIANTS = ("fusion1", "fusion2", "monot5", "duot5", "t5_lr")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; usage errors are 1 here
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="litsearch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="build an index snapshot")
    p_index.add_argument("--corpus", required=True)
    p_index.add_argument("--granularity", required=True, choices=GRANULARITIES)
    p_index.add_argument("--out", required=True)

    p_run = sub.add_parser("run", help="produce a TREC run file")
    p_run.add_argument("--topics", required=True)
    p_run.add_argument("--indexes", required=True, help="directory with <granularity>.idx snapshots")
    p_run.add_argument("--variant", required=True, choices=RUN_VARIANTS)
    p_run.add_argument("--qrels")
    p_run.add_argument("--residual", action="store_true")
    p_run.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    p_run.add_argument("--tag")
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--scorer", default="reference")
    p_run.add_argument("--rerank-depth", type=int, default=DEFAULT_RERANK_DEPTH)
    p_run.add_argument("--max-tokens", type=int, default=DEFAULT_MAX_TOKENS)
    p_run.add_argument("--alpha", type=float, default=0.5)
    p_run.add_argument("--theta", type=float, default=DEFAULT_THETA)
    p_run.add_argument("--k-rrf", type=float, default=DEFAULT_K_RRF)
    p_run.add_argument("--jobs", type=int, default=1)

    p_eval = sub.add_parser("eval", help="evaluate a run against qrels")
    p_eval.add_argument("--run", required=True)
    p_eval.add_argument("--qrels", required=True)
    p_eval.add_argument("--metrics", default=",".join(METRIC_NAMES),
                        help="comma-separated subset of " + ",".join(METRIC_NAMES))
    p_eval.add_argument("--format", choices=("text", "jsonl"), default="text")
    p_eval.add_argument("--out", help="also write the report to this file")
    p_eval.add_argument("--plot-dir", help="render per-metric figures into this directory")
    p_eval.add_argument("--no-per-topic", action="store_true")

    p_fuse = sub.add_parser("fuse", help="RRF-combine run files")
    p_fuse.add_argument("--runs", nargs="+", required=True)
    p_fuse.add_argument("--k", type=float, default=DEFAULT_K_RRF)
    p_fuse.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    p_fuse.add_argument("--tag", required=True)
    p_fuse.add_argument("--out", required=True)

    p_serve = sub.add_parser("serve", help="run the search service")
    p_serve.add_argument("--config")
    p_serve.add_argument("--corpus")
    p_serve.add_argument("--indexes")
    p_serve.add_argument("--scorer")
    p_serve.add_argument("--host")
    p_serve.add_argument("--port", type=int)
    p_serve.add_argument("--rerank-depth", type=int)
    p_serve.add_argument("--max-tokens", type=int)
    p_serve.add_argument("--static-dir")
    return parser


def _atomic_write(path: str, write_fn) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    os.close(fd)
    try:
        write_fn(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_index(args) -> int:
    articles = load_corpus(args.corpus)
    units = generate_all_units(articles.values(), args.granularity)
    idx = build_index(units, args.granularity)
    _atomic_write(args.out, lambda tmp: save_index(idx, tmp))
    print(f"indexed {idx.n_units} units (granularity={idx.granularity}, avg_dl={idx.avg_dl:.4f})")
    return EXIT_OK


def load_index_dir(directory: str) -> dict[str, InvertedIndex]:
    indexes = {}
    for granularity in GRANULARITIES:
        path = Path(directory) / f"{granularity}.idx"
        if not path.is_file():
            raise LitsearchError(f"missing index snapshot {path}")
        indexes[granularity] = load_index(path)
    return indexes


def _doc_texts_from_index(idx: InvertedIndex) -> dict[str, str]:
    return {unit_id: text for unit_id, (_, text) in idx.unit_meta.items()}


def _run_one_topic(topic: Topic, args, indexes, scorer, doc_texts, qrels) -> RankedList:
    variant = args.variant
    if variant in ("fusion1", "fusion2"):
        ranked = fusion_run(topic, indexes, variant, depth=args.depth,
                            k_rrf=args.k_rrf, theta=args.theta)
    else:
        stage1 = [
            fusion_run(topic, indexes, v, depth=args.depth, k_rrf=args.k_rrf, theta=args.theta)
            for v in ("fusion1", "fusion2")
        ]
        reranked = [
            pointwise_rerank(scorer, topic.query, lst, doc_texts,
                             depth=args.rerank_depth, max_tokens=args.max_tokens)
            for lst in stage1
        ]
        ranked = rrf(reranked, k_rrf=args.k_rrf, depth=args.depth)
        if variant == "duot5":
            ranked = pairwise_rerank(scorer, topic.query, ranked, doc_texts,
                                     max_tokens=args.max_tokens)
        elif variant == "t5_lr":
            vocabulary, idf_table = classifier_features(indexes["abstract"])
            train_texts = _doc_texts_from_index(indexes["abstract"])
            try:
                model = train_classifier(topic.topic_id, qrels, train_texts, vocabulary, idf_table)
                ranked = classify_interpolate(model, ranked, train_texts, args.alpha)
            except SingleClassError:
                pass  # no usable judgments for this topic: keep the unmixed ranking
    if args.residual:
        ranked = residual_filter(ranked, qrels)
    return ranked


def cmd_run(args) -> int:
    if args.variant == "t5_lr" and not args.qrels:
        raise UsageError("--variant t5_lr requires --qrels")
    if args.residual and not args.qrels:
        raise UsageError("--residual requires --qrels")
    topics = parse_topics(args.topics)
    indexes = load_index_dir(args.indexes)
    qrels = parse_qrels(args.qrels) if args.qrels else Qrels()
    tag = args.tag or args.variant
    doc_texts = _doc_texts_from_index(indexes["fulltext"])
    scorer = make_scorer(args.scorer, idf=indexes["abstract"].idf_table())
    try:
        if args.jobs > 1:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                rankings = list(
                    pool.map(
                        lambda t: _run_one_topic(t, args, indexes, scorer, doc_texts, qrels),
                        topics,
                    )
                )
        else:
            rankings = [_run_one_topic(t, args, indexes, scorer, doc_texts, qrels) for t in topics]
    finally:
        if hasattr(scorer, "close"):
            scorer.close()
    run = RunFile(tag=tag)
    for ranking in rankings:
        run.add(ranking.retagged(tag))
    _atomic_write(args.out, lambda tmp: write_run(run, tmp))
    print(f"wrote {args.out}: {len(run.rankings)} topics, variant={args.variant}")
    return EXIT_OK


def cmd_eval(args) -> int:
    from .report import render_figures, render_jsonl, render_text

    metrics = tuple(m.strip() for m in args.metrics.split(",") if m.strip())
    run = parse_run(args.run)
    qrels = parse_qrels(args.qrels)
    report = evaluate(run, qrels, metrics)
    if args.format == "jsonl":
        rendered = render_jsonl(report)
    else:
        rendered = render_text(report, per_topic=not args.no_per_topic)
    print(rendered)
    if args.out:
        _atomic_write(args.out, lambda tmp: Path(tmp).write_text(rendered + "\n", encoding="utf-8"))
    if args.plot_dir:
        written = render_figures(report, args.plot_dir)
        print(f"wrote {len(written)} figures to {args.plot_dir}", file=sys.stderr)
    return EXIT_OK


def cmd_fuse(args) -> int:
    runs = [parse_run(path) for path in args.runs]
    fused = RunFile(tag=args.tag)
    all_topics = sorted({topic for run in runs for topic in run.topics()})
    for topic_id in all_topics:
        lists = [run.rankings[topic_id] for run in runs if topic_id in run.rankings]
        fused.add(rrf(lists, k_rrf=args.k, depth=args.depth).retagged(args.tag))
    _atomic_write(args.out, lambda tmp: write_run(fused, tmp))
    print(f"wrote {args.out}: {len(fused.rankings)} topics fused from {len(runs)} runs")
    return EXIT_OK


def load_config(path: str | None) -> dict[str, str]:
    """Flat key=value config; blank lines and # comments ignored."""
    config: dict[str, str] = {}
    if not path:
        return config
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise LitsearchError(f"{path}:{i}: expected key=value, found {line!r}")
            key, _, value = line.partition("=")
            config[key.strip()] = value.strip()
    return config


def cmd_serve(args) -> int:
    import uvicorn

    from .service import SearchEngine, create_app

    config = load_config(args.config)

    def setting(key: str, flag_value, default=None):
        return flag_value if flag_value is not None else config.get(key, default)

    corpus_path = setting("corpus", args.corpus)
    index_dir = setting("indexes", args.indexes)
    if not corpus_path or not index_dir:
        raise UsageError("serve requires corpus and indexes (flags or config keys)")
    scorer_spec = setting("scorer", args.scorer, "reference")
    host = setting("host", args.host, "127.0.0.1")
    port = int(setting("port", args.port, 8080))
    rerank_depth = int(setting("rerank_depth", args.rerank_depth, DEFAULT_RERANK_DEPTH))
    max_tokens = int(setting("max_tokens", args.max_tokens, DEFAULT_MAX_TOKENS))
    static_dir = setting("static_dir", args.static_dir)

    articles = load_corpus(corpus_path)
    indexes = load_index_dir(index_dir)
    scorer = make_scorer(scorer_spec, idf=indexes["abstract"].idf_table())
    engine = SearchEngine(
        articles, indexes, scorer,
        rerank_depth=rerank_depth, max_tokens=max_tokens,
        corpus_version=os.path.basename(corpus_path),
    )
    app = create_app(engine, static_dir=static_dir)
    print(f"serving {len(articles)} articles on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return EXIT_OK


COMMANDS = {
    "index": cmd_index,
    "run": cmd_run,
    "eval": cmd_eval,
    "fuse": cmd_fuse,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScorerError as exc:
        print(f"scorer failure: {exc}", file=sys.stderr)
        return EXIT_SCORER
    except (LitsearchError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
