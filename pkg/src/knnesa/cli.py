"""Command-line entry point.

Exit codes: 0 success, 1 data or module error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from knnesa.bench import render_report, run_synthetic_bench
from knnesa.config import ConfigError, resolve_config
from knnesa.corpus import load_corpus, load_vocabulary
from knnesa.errors import KnnEsaError, UnclassifiableDocument
from knnesa.esa import AssociationIndex, build_associations, esa_classify
from knnesa.knn.classifier import classify
from knnesa.knn.features import assemble_training_set
from knnesa.knn.models import RankerModel, train
from knnesa.knn.selection import STRATEGIES
from knnesa.metrics import evaluate_run, format_table
from knnesa.parallel import ordered_map
from knnesa.vsm_index import VectorIndex, build_index

log = logging.getLogger("knnesa")


def _common(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("common options")
    g.add_argument("--config", help="flat 'key = value' file with defaults; flags override it")
    g.add_argument("--threads", type=int, help="cap on worker threads (results do not depend on it)")
    g.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.set_defaults(subparser=parser)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="knnesa",
        description="Multi-label indexing of title+abstract documents (kNN label ranking and ESA).",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("build-index", help="build the TF.IDF inverted index of a labeled corpus")
    p.add_argument("--corpus", help="corpus JSON Lines file (env KNNESA_CORPUS)")
    p.add_argument("--out", help="index file to write")
    _common(p)

    p = sub.add_parser("train", help="train a label-ranking model from neighbor candidates")
    p.add_argument("--corpus", help="training documents with gold labels")
    p.add_argument("--index", help="index built by build-index")
    p.add_argument("--vocab", help="label vocabulary JSON")
    p.add_argument("--algo", dest="algorithm", choices=["nb", "dt", "rf"], help="learner (default rf)")
    p.add_argument("--k", type=int, help="neighbors per document (default 25)")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--trees", type=int, help="random-forest size (default 100)")
    p.add_argument("--no-exclude-self", action="store_true",
                   help="let a training document be its own neighbor")
    p.add_argument("--out", help="model file to write")
    _common(p)

    p = sub.add_parser("classify", help="predict labels for documents with a trained model")
    p.add_argument("--model", help="model file from train")
    p.add_argument("--index", help="index file")
    p.add_argument("--vocab", help="label vocabulary JSON")
    p.add_argument("--input", help="documents to classify (JSON Lines)")
    p.add_argument("--strategy", choices=STRATEGIES, help="label-count strategy (default cutoff)")
    p.add_argument("--alpha", type=float, help="cut-off constant (default 1.6)")
    p.add_argument("--tau", type=float, help="score threshold (default 0.5)")
    p.add_argument("--k", type=int, help="neighbors per document (default 25)")
    p.add_argument("--out", help="prediction JSON Lines to write")
    _common(p)

    p = sub.add_parser("evaluate", help="example-based metrics of prediction files")
    p.add_argument("--gold", help="JSON Lines with gold 'labels'")
    p.add_argument("--pred", action="append", help="prediction JSON Lines (repeatable)")
    p.add_argument("--out", help="report JSON to write")
    p.add_argument("--per-doc", action="store_true", help="include per-document rows in the report")
    _common(p)

    p = sub.add_parser("esa-build", help="build term-concept associations")
    p.add_argument("--corpus", help="labeled corpus JSON Lines")
    p.add_argument("--measure", choices=["jaccard", "tficf"], help="association measure (default jaccard)")
    p.add_argument("--min-df", type=int, default=5, help="minimum document count of a term (default 5)")
    p.add_argument("--max-terms", type=int, default=200, help="terms kept per concept (default 200)")
    p.add_argument("--out", help="association file to write")
    _common(p)

    p = sub.add_parser("esa-classify", help="rank concepts for documents with an association file")
    p.add_argument("--assoc", help="association file from esa-build")
    p.add_argument("--input", help="documents to classify (JSON Lines)")
    p.add_argument("--n", default="gold", help="'gold' (use each document's gold label count) or an integer")
    p.add_argument("--out", help="prediction JSON Lines to write")
    _common(p)

    p = sub.add_parser("bench", help="planted-topic comparison of learners, strategies and measures")
    p.add_argument("--suite", default="synthetic", choices=["synthetic"])
    p.add_argument("--seed", type=int, help="generator and learner seed (default 0)")
    p.add_argument("--n-train", type=int, default=2000)
    p.add_argument("--n-test", type=int, default=500)
    p.add_argument("--topics", type=int, default=50)
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--trees", type=int)
    p.add_argument("--no-esa", action="store_true", help="skip the association-measure comparison")
    p.add_argument("--out", help="report JSON to write")
    p.add_argument("--pred-dir", help="directory for per-configuration prediction files")
    _common(p)
    return parser


REQUIRED = {
    "build-index": ["corpus", "out"],
    "train": ["corpus", "index", "vocab", "out"],
    "classify": ["model", "index", "vocab", "input", "out"],
    "evaluate": ["gold", "pred"],
    "esa-build": ["corpus", "out"],
    "esa-classify": ["assoc", "input", "out"],
    "bench": [],
}


def _write_jsonl(path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def _check_inputs(*paths) -> None:
    for path in paths:
        if not Path(path).is_file():
            raise KnnEsaError(f"input file not found: {path}")


def cmd_build_index(args, cfg) -> None:
    _check_inputs(cfg.corpus)
    docs = load_corpus(cfg.corpus)
    index = build_index(docs)
    index.save(args.out)
    log.info("indexed %d documents, %d terms -> %s", index.n_docs, len(index.doc_freq), args.out)


def cmd_train(args, cfg) -> None:
    _check_inputs(cfg.corpus, cfg.index, cfg.vocab)
    docs = load_corpus(cfg.corpus)
    index = VectorIndex.load(cfg.index)
    vocab = load_vocabulary(cfg.vocab)
    instances = assemble_training_set(
        [d for d in docs if d.labels], index, vocab, cfg.k,
        exclude_self=not args.no_exclude_self, threads=cfg.threads,
    )
    model = train(instances, cfg.algorithm, seed=cfg.seed, n_trees=cfg.trees, threads=cfg.threads)
    model.meta["k"] = cfg.k
    model.save(args.out)
    log.info("trained %s on %d instances -> %s", model.algorithm, len(instances), args.out)


def cmd_classify(args, cfg) -> None:
    _check_inputs(cfg.model, cfg.index, cfg.vocab, args.input)
    model = RankerModel.load(cfg.model)
    index = VectorIndex.load(cfg.index)
    vocab = load_vocabulary(cfg.vocab)
    docs = load_corpus(args.input)

    def one(doc):
        try:
            return classify(doc, model, index, vocab, cfg.k, cfg.strategy, cfg.alpha, cfg.tau).to_record()
        except UnclassifiableDocument as exc:
            log.warning("%s", exc)
            return {"id": doc.id, "labels": [], "ranked": []}

    _write_jsonl(args.out, ordered_map(one, docs, cfg.threads))
    log.info("classified %d documents -> %s", len(docs), args.out)


def cmd_evaluate(args, cfg) -> None:
    _check_inputs(args.gold, *args.pred)
    reports = evaluate_run(args.gold, args.pred)
    rows = [dict(r.to_json(), run=name) for name, r in reports.items()]
    print(format_table(rows, ["run", "ebp", "ebr", "ebf", "acc", "m", "excluded"]))
    if args.out:
        if len(reports) == 1:
            payload = next(iter(reports.values())).to_json(per_doc=args.per_doc)
        else:
            payload = {name: r.to_json(per_doc=args.per_doc) for name, r in reports.items()}
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def cmd_esa_build(args, cfg) -> None:
    _check_inputs(cfg.corpus)
    docs = load_corpus(cfg.corpus)
    assoc = build_associations(docs, cfg.measure, min_df=args.min_df, max_terms=args.max_terms)
    assoc.save(args.out)
    log.info("associations for %d concepts (%s) -> %s", len(assoc.concept_vectors), assoc.measure, args.out)


def cmd_esa_classify(args, cfg) -> None:
    _check_inputs(args.assoc, args.input)
    assoc = AssociationIndex.load(args.assoc)
    docs = load_corpus(args.input)
    fixed = None if args.n == "gold" else int(args.n)

    def one(doc):
        n = len(doc.labels) if fixed is None else fixed
        ranked = esa_classify(doc, assoc, n) if n > 0 else []
        return {"id": doc.id, "labels": [c for c, _ in ranked], "ranked": [[c, s] for c, s in ranked]}

    _write_jsonl(args.out, ordered_map(one, docs, cfg.threads))


def cmd_bench(args, cfg) -> None:
    result = run_synthetic_bench(
        seed=cfg.seed, n_train=args.n_train, n_test=args.n_test, n_topics=args.topics,
        k=cfg.k, alpha=cfg.alpha, tau=cfg.tau, n_trees=cfg.trees, esa=not args.no_esa,
        threads=cfg.threads,
    )
    print(render_report(result.report))
    if args.out:
        Path(args.out).write_text(result.report_json(), encoding="utf-8")
    if args.pred_dir:
        os.makedirs(args.pred_dir, exist_ok=True)
        for name in sorted(result.predictions):
            Path(args.pred_dir, f"{name}.jsonl").write_text(result.predictions_jsonl(name), encoding="utf-8")


COMMANDS = {
    "build-index": cmd_build_index,
    "train": cmd_train,
    "classify": cmd_classify,
    "evaluate": cmd_evaluate,
    "esa-build": cmd_esa_build,
    "esa-classify": cmd_esa_classify,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)
    sub = args.subparser

    overrides = {
        key: getattr(args, key, None)
        for key in ("k", "alpha", "tau", "seed", "algorithm", "strategy", "measure", "trees",
                    "threads", "corpus", "index", "model", "vocab")
    }
    try:
        cfg = resolve_config(args.config, overrides)
    except ConfigError as exc:
        sub.error(str(exc))
    except OSError as exc:
        sub.error(f"cannot read config file: {exc}")

    # Paths may come from the config file or the environment.
    for key in ("corpus", "index", "model", "vocab"):
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, getattr(cfg, key))
    missing = [f"--{key}" for key in REQUIRED[args.command] if getattr(args, key, None) in (None, [])]
    if missing:
        sub.error(f"the following arguments are required: {', '.join(missing)}")
    if args.command == "esa-classify" and args.n != "gold":
        if not args.n.isdigit() or int(args.n) < 1:
            sub.error("--n must be 'gold' or a positive integer")

    log.info("effective config: %s", json.dumps(cfg.as_dict(), sort_keys=True))
    try:
        COMMANDS[args.command](args, cfg)
    except (KnnEsaError, OSError) as exc:
        print(f"knnesa {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
