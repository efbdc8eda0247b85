"""Command-line pipeline: match, select-fields, sample, train, predict, eval, explore."""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

from fortag import corpus, embedder, ensemble, evaluate, fields, sampler
from fortag.errors import FortagError

logger = logging.getLogger("fortag")

_FMT = argparse.ArgumentDefaultsHelpFormatter


def _read_lines(path):
    with open(path, encoding="utf-8") as fh:
        return fh.readlines()


def _load_labeled(args) -> list[corpus.LabeledRecord]:
    if args.labeled:
        return corpus.parse_labeled(_read_lines(args.labeled))
    if not (args.publications and args.journals):
        raise FortagError("give --labeled, or both --publications and --journals")
    records = corpus.parse_publications(_read_lines(args.publications))
    journals = corpus.parse_journal_list(_read_lines(args.journals))
    return corpus.match_for_codes(records, journals)


def _write_stats(path, labeled, scheme=None) -> None:
    rows = [["for_count", str(k), v] for k, v in corpus.for_match_stats(labeled).items()]
    avail = corpus.metadata_availability(labeled, scheme)
    rows += [["availability", key, avail.overall[key]] for key in corpus.AVAILABILITY_KEYS]
    if scheme is not None:
        rows += [["field_count", str(k), v] for k, v in fields.field_coverage(labeled, scheme).items()]
        rows.append(["coverage_loss", "", fields.coverage_loss(labeled, scheme)])
        for label, shares in avail.per_field.items():
            rows += [[f"availability:{label}", key, shares[key]] for key in corpus.AVAILABILITY_KEYS]
    corpus.write_share_table(path, ["statistic", "key", "share"], rows)


def cmd_match(args) -> None:
    records = corpus.parse_publications(_read_lines(args.publications))
    journals = corpus.parse_journal_list(_read_lines(args.journals))
    labeled = corpus.match_for_codes(records, journals)
    with open(args.out, "w", encoding="utf-8") as fh:
        corpus.write_publications(labeled, fh)
    if args.stats_out:
        _write_stats(args.stats_out, labeled)
    print(f"labeled {len(labeled)} records -> {args.out}")


def cmd_select_fields(args) -> None:
    labeled = _load_labeled(args)
    parents = [p.strip() for p in args.drill_down.split(",") if p.strip()]
    scheme = fields.build_scheme(labeled, args.threshold_2digit, args.threshold_4digit, parents)
    scheme.save(args.out)
    if args.stats_out:
        _write_stats(args.stats_out, labeled, scheme)
    print(f"{len(scheme.fields)} fields -> {args.out}")


def cmd_sample(args) -> None:
    labeled = corpus.parse_labeled(_read_lines(args.labeled))
    scheme = fields.FieldScheme.load(args.scheme)
    docs = sampler.build_channel_documents(labeled, scheme, args.channel)
    spec = sampler.SamplingSpec(args.strategy, args.size, args.seed, args.split_ratio)
    classes = scheme.labels if args.strategy == sampler.STRATIFIED else None
    if classes is not None:
        present = {lab for d in docs for lab in d.labels}
        classes = [c for c in classes if c in present or not args.skip_empty_classes]
    picked = sampler.sample(docs, spec, classes)
    split = sampler.split_train_test(picked, spec)
    for path, part in ((args.train_out, split.train), (args.test_out, split.test)):
        with open(path, "w", encoding="utf-8") as fh:
            sampler.write_training_file(part, fh)
    print(f"{args.channel}: {len(split.train)} train / {len(split.test)} test documents")


def _params(args) -> embedder.ModelParams:
    return embedder.ModelParams(
        dim=args.dim,
        epoch=args.epoch,
        word_ngrams=args.word_ngrams,
        min_count=args.min_count,
        loss=args.loss,
        learning_rate=args.lr,
        buckets=args.buckets,
        seed=args.seed,
    )


def cmd_train(args) -> None:
    params = _params(args)
    dataset = sampler.read_training_file(_read_lines(args.dataset))
    logger.info("training %s model on %d documents", args.channel, len(dataset))
    model = embedder.train(dataset, params, workers=args.workers)
    embedder.save_model(model, args.out)
    print(
        f"{args.channel}: {len(model.vocab.words)} words, {len(model.labels)} labels -> {args.out}"
    )


def _policy(args) -> ensemble.EnsemblePolicy:
    return ensemble.EnsemblePolicy(
        threshold=args.threshold,
        journal_weight_bonus=args.journal_bonus,
        md_demotion=not args.no_md_demotion,
    )


def cmd_predict(args) -> None:
    models = {
        ch: embedder.load_model(path)
        for ch in sampler.CHANNELS
        if (path := getattr(args, f"{ch}_model"))
    }
    if not models:
        raise FortagError("give at least one --<channel>-model")
    scheme = fields.FieldScheme.load(args.scheme) if args.scheme else None
    records = corpus.parse_publications(_read_lines(args.publications))
    decisions = ensemble.classify_records(models, records, _policy(args), scheme)
    with open(args.out, "w", encoding="utf-8") as fh:
        ensemble.write_decisions(decisions, fh)
    labeled = sum(d.final_label is not None for d in decisions)
    print(f"classified {labeled}/{len(decisions)} records -> {args.out}")


def cmd_eval_metrics(args) -> None:
    model = embedder.load_model(args.model)
    dataset = sampler.read_training_file(_read_lines(args.dataset))
    predicted = []
    for text, _ in dataset:
        top = model.predict(text, k=1, threshold=args.threshold)
        predicted.append(top[0].label if top else None)
    scheme = fields.FieldScheme.load(args.scheme) if args.scheme else None
    report = evaluate.score_predictions(
        predicted, [labels for _, labels in dataset], scheme.labels if scheme else None
    )
    evaluate.emit_reports(report, args.out)
    print(
        f"micro-F1 {report.micro.f1:.4f}  macro-F1 {report.macro_f1:.4f} "
        f"({report.n} documents) -> {args.out}"
    )


def cmd_eval_transition(args) -> None:
    decisions = ensemble.read_decisions(_read_lines(args.decisions))
    scheme = fields.FieldScheme.load(args.scheme) if args.scheme else None
    matrix = evaluate.build_transition_matrix(decisions, scheme.labels if scheme else None)
    evaluate.emit_reports(matrix, args.out)
    print(f"{len(decisions)} decisions, {len(matrix.labels)} labels -> {args.out}")


def cmd_explore_nn(args) -> None:
    model = embedder.load_model(args.model)
    for sim, word in embedder.nearest_neighbors(model, args.word, args.k):
        print(f"{word}\t{sim:.6f}")


def cmd_explore_analogies(args) -> None:
    model = embedder.load_model(args.model)
    for sim, word in embedder.analogies(model, args.a, args.b, args.c, args.k):
        print(f"{word}\t{sim:.6f}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fortag", description="Article-level FoR classification pipeline", formatter_class=_FMT
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("match", help="join publications with the journal list", formatter_class=_FMT)
    p.add_argument("--publications", required=True, help="publications JSONL file")
    p.add_argument("--journals", required=True, help="journal list CSV file")
    p.add_argument("--out", required=True, help="labeled records JSONL output")
    p.add_argument("--stats-out", default=None, help="optional CSV of match/availability shares")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("select-fields", help="derive the field scheme", formatter_class=_FMT)
    p.add_argument("--labeled", default=None, help="labeled records JSONL (from match)")
    p.add_argument("--publications", default=None, help="publications JSONL file")
    p.add_argument("--journals", default=None, help="journal list CSV file")
    p.add_argument("--threshold-2digit", type=float, default=0.03, help="2-digit share threshold")
    p.add_argument("--threshold-4digit", type=float, default=0.02, help="4-digit share threshold")
    p.add_argument("--drill-down", default="11,06", help="comma-separated drill-down parents")
    p.add_argument("--out", required=True, help="scheme JSON output")
    p.add_argument("--stats-out", default=None, help="optional CSV of coverage statistics")
    p.set_defaults(func=cmd_select_fields)

    p = sub.add_parser("sample", help="build a channel train/test dataset", formatter_class=_FMT)
    p.add_argument("--labeled", required=True, help="labeled records JSONL")
    p.add_argument("--scheme", required=True, help="scheme JSON")
    p.add_argument("--channel", required=True, choices=sampler.CHANNELS, help="metadata channel")
    p.add_argument("--strategy", choices=(sampler.RANDOM, sampler.STRATIFIED), default=sampler.RANDOM,
                   help="sampling strategy")
    p.add_argument("--size", type=int, required=True, help="target sample size")
    p.add_argument("--seed", type=int, required=True, help="random seed")
    p.add_argument("--split-ratio", type=float, default=0.9, help="train share of the split")
    p.add_argument("--skip-empty-classes", action="store_true",
                   help="stratify only over scheme classes present on this channel")
    p.add_argument("--train-out", required=True, help="training file output")
    p.add_argument("--test-out", required=True, help="test file output")
    p.set_defaults(func=cmd_sample)

    defaults = embedder.ModelParams()
    p = sub.add_parser("train", help="train one channel model", formatter_class=_FMT)
    p.add_argument("--channel", required=True, choices=sampler.CHANNELS, help="metadata channel")
    p.add_argument("--dataset", required=True, help="training file (__label__ format)")
    p.add_argument("--dim", type=int, default=defaults.dim, help="embedding dimension")
    p.add_argument("--epoch", type=int, default=defaults.epoch, help="training epochs")
    p.add_argument("--word-ngrams", type=int, default=defaults.word_ngrams, help="max word n-gram order")
    p.add_argument("--min-count", type=int, default=defaults.min_count, help="minimal word count")
    p.add_argument("--loss", choices=embedder.model.LOSSES, default=defaults.loss, help="loss function")
    p.add_argument("--lr", type=float, default=defaults.learning_rate, help="initial learning rate")
    p.add_argument("--buckets", type=int, default=defaults.buckets, help="n-gram hash buckets")
    p.add_argument("--seed", type=int, required=True, help="random seed")
    p.add_argument("--workers", type=int, default=1,
                   help="training threads; more than 1 is not reproducible")
    p.add_argument("--out", required=True, help="model file output")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify publications with the ensemble", formatter_class=_FMT)
    p.add_argument("--publications", required=True, help="publications JSONL file")
    for ch in sampler.CHANNELS:
        p.add_argument(f"--{ch.replace('_', '-')}-model", default=None, help=f"{ch} model file")
    p.add_argument("--scheme", default=None, help="scheme JSON the models were trained on")
    p.add_argument("--threshold", type=float, default=0.5, help="per-channel probability threshold")
    p.add_argument("--journal-bonus", type=float, default=0.01, help="journal-title vote bonus")
    p.add_argument("--no-md-demotion", action="store_true",
                   help="do not prefer specific fields over Multidisciplinary in ties")
    p.add_argument("--out", required=True, help="decisions JSONL output")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="evaluation reports", formatter_class=_FMT)
    esub = p.add_subparsers(dest="eval_command", required=True)
    q = esub.add_parser("metrics", help="precision/recall/F1 of a channel model", formatter_class=_FMT)
    q.add_argument("--model", required=True, help="model file")
    q.add_argument("--dataset", required=True, help="test file (__label__ format)")
    q.add_argument("--scheme", default=None, help="scheme JSON fixing class order")
    q.add_argument("--threshold", type=float, default=0.0, help="probability threshold for a prediction")
    q.add_argument("--out", required=True, help="metrics CSV output")
    q.set_defaults(func=cmd_eval_metrics)
    q = esub.add_parser("transition", help="journal→article transition matrix", formatter_class=_FMT)
    q.add_argument("--decisions", required=True, help="decisions JSONL (from predict)")
    q.add_argument("--scheme", default=None, help="scheme JSON fixing label order")
    q.add_argument("--out", required=True, help="matrix CSV output")
    q.set_defaults(func=cmd_eval_transition)

    p = sub.add_parser("explore", help="inspect word embeddings", formatter_class=_FMT)
    xsub = p.add_subparsers(dest="explore_command", required=True)
    q = xsub.add_parser("nn", help="nearest neighbours of a word", formatter_class=_FMT)
    q.add_argument("--model", required=True, help="model file")
    q.add_argument("--word", required=True, help="query word")
    q.add_argument("--k", type=int, default=10, help="number of neighbours")
    q.set_defaults(func=cmd_explore_nn)
    q = xsub.add_parser("analogies", help="a is to b as c is to ?", formatter_class=_FMT)
    q.add_argument("--model", required=True, help="model file")
    q.add_argument("--a", required=True, help="first word")
    q.add_argument("--b", required=True, help="second word")
    q.add_argument("--c", required=True, help="third word")
    q.add_argument("--k", type=int, default=10, help="number of answers")
    q.set_defaults(func=cmd_explore_analogies)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except (FortagError, OSError) as err:
        print(f"fortag {args.command}: error: {err}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())
