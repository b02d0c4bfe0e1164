"""Command-line entry point.

Machine-readable results go to stdout as JSON, human summaries to stderr.
Exit codes: 0 success, 1 bad input, 2 internal invariant violation.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import audit, corpus as cp, metrics, models, pipeline, synthetic

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2

log = logging.getLogger("toxspans")


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _read_corpus(path) -> cp.Corpus:
    try:
        return cp.read_corpus(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _read_predictions(path):
    try:
        with open(path, encoding="utf-8") as f:
            return cp.read_predictions(f, source=str(path))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _load(path, kind):
    try:
        model = models.load_model(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    if not isinstance(model, kind):
        raise InputError(f"{path}: expected a {kind.__name__}, got a {type(model).__name__}")
    return model


def _emit(doc) -> None:
    json.dump(doc, sys.stdout)
    sys.stdout.write("\n")


def cmd_stats(args) -> None:
    report = cp.corpus_stats(_read_corpus(args.corpus))
    _emit(report.to_dict())
    print(
        f"{report.record_count} records, single-span {report.single_span_fraction:.2%}, "
        f"zero-span {report.zero_span_fraction:.2%}",
        file=sys.stderr,
    )


def cmd_split(args) -> None:
    src = _read_corpus(args.corpus)
    derived = cp.split_corpus(src)
    with open(args.out, "w", encoding="utf-8", newline="") as f:
        cp.write_corpus(derived, f)
    print(f"{len(src)} posts -> {len(derived)} single-span posts", file=sys.stderr)


def cmd_export_ner(args) -> None:
    records = cp.export_ner(_read_corpus(args.corpus))
    with open(args.out, "w", encoding="utf-8") as f:
        cp.write_ner(records, f)
    print(f"wrote {len(records)} NER records to {args.out}", file=sys.stderr)


def cmd_train(args) -> None:
    train = _read_corpus(args.corpus)
    if args.lexicon:
        try:
            model = models.train_lexicon(train, args.min_count, args.min_ratio)
        except ValueError as exc:
            raise InputError(f"{args.corpus}: {exc}") from None
        print(f"lexicon: {len(model.entries)} entries, {len(model.active)} active", file=sys.stderr)
    else:
        cfg = models.TrainConfig(epochs=args.epochs, learning_rate=args.learning_rate, seed=args.seed)
        try:
            model = models.train_gate(train, cfg, args.buckets, expand=not args.no_expand)
        except ValueError as exc:
            raise InputError(f"{args.corpus}: {exc}") from None
        final = model.train_losses[-1] if model.train_losses else float("nan")
        print(f"gate: {cfg.epochs} epochs, final log-loss {final:.4f}", file=sys.stderr)
    models.save_model(model, args.out)


def cmd_predict(args) -> None:
    gate = _load(args.gate, models.GateModel)
    lexicon = _load(args.lexicon, models.LexiconModel)
    data = _read_corpus(args.corpus)
    cfg = pipeline.PipelineConfig(args.threshold, args.max_iterations, not args.keep_whitespace)
    preds = pipeline.run_corpus(gate, lexicon, data, cfg, jobs=args.jobs)
    with open(args.out, "w", encoding="utf-8") as f:
        cp.write_predictions(preds, f)
    print(f"wrote {len(preds)} predictions to {args.out}", file=sys.stderr)


def cmd_eval(args) -> None:
    gold = _read_corpus(args.gold)
    preds = _read_predictions(args.pred)
    try:
        report = metrics.evaluate(preds, gold)
    except ValueError as exc:
        raise InputError(f"{args.pred}: {exc}") from None
    _emit(report.to_dict())
    print(report.summary(), file=sys.stderr)


def cmd_audit(args) -> None:
    data = _read_corpus(args.corpus)
    consistency = audit.consistency_report(data, args.min_total)
    flags = audit.shape_flags(data)
    diffs = None
    if args.pred:
        try:
            diffs = audit.diff_report(_read_predictions(args.pred), data)
        except ValueError as exc:
            raise InputError(f"{args.pred}: {exc}") from None
    sys.stdout.write(audit.report_to_json(consistency, flags, diffs) + "\n")
    print(audit.report_to_text(consistency, flags, diffs), file=sys.stderr)


def cmd_kfold(args) -> None:
    data = _read_corpus(args.corpus)
    try:
        pairs = cp.kfold_split(data, args.k, args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for i, (train, heldout) in enumerate(pairs):
        for name, part in (("train", train), ("heldout", heldout)):
            with open(out / f"fold{i}_{name}.csv", "w", encoding="utf-8", newline="") as f:
                cp.write_corpus(part, f)
        manifest.append({"fold": i, "train_ids": train.ids, "heldout_ids": heldout.ids})
    with open(out / "folds.json", "w", encoding="utf-8") as f:
        json.dump({"k": args.k, "seed": args.seed, "folds": manifest}, f)
    print(f"wrote {args.k} folds to {out}", file=sys.stderr)


def cmd_synth(args) -> None:
    data = synthetic.generate_corpus(args.n, seed=args.seed)
    with open(args.out, "w", encoding="utf-8", newline="") as f:
        cp.write_corpus(data, f)
    print(f"wrote {len(data)} synthetic posts to {args.out}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="toxspans", description="Toxic span detection toolkit.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("stats", help="corpus statistics as JSON")
    s.add_argument("corpus")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("split", help="split multi-span posts into single-span posts")
    s.add_argument("corpus")
    s.add_argument("out")
    s.set_defaults(func=cmd_split)

    s = sub.add_parser("export-ner", help="write TOXIC-entity JSON lines")
    s.add_argument("corpus")
    s.add_argument("out")
    s.set_defaults(func=cmd_export_ner)

    s = sub.add_parser("train", help="train the gate or the lexicon extractor")
    kind = s.add_mutually_exclusive_group(required=True)
    kind.add_argument("--gate", action="store_true")
    kind.add_argument("--lexicon", action="store_true")
    s.add_argument("corpus")
    s.add_argument("--out", required=True)
    s.add_argument("--min-count", type=int, default=2)
    s.add_argument("--min-ratio", type=float, default=0.5)
    s.add_argument("--epochs", type=int, default=models.TrainConfig.epochs)
    s.add_argument("--learning-rate", type=float, default=models.TrainConfig.learning_rate)
    s.add_argument("--buckets", type=int, default=models.DEFAULT_BUCKETS)
    s.add_argument("--no-expand", action="store_true", help="train the gate on posts as-is, without split/cleaned variants")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("predict", help="run the iterative detection pipeline")
    s.add_argument("--gate", required=True)
    s.add_argument("--lexicon", required=True)
    s.add_argument("corpus")
    s.add_argument("--out", required=True)
    s.add_argument("--threshold", type=float, default=pipeline.PipelineConfig.gate_threshold)
    s.add_argument("--max-iterations", type=int, default=pipeline.PipelineConfig.max_iterations)
    s.add_argument("--keep-whitespace", action="store_true", help="do not delete a space next to removed spans")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("eval", help="per-post F1 of predictions against gold")
    s.add_argument("--pred", required=True)
    s.add_argument("--gold", required=True)
    s.add_argument("--jobs", type=int, default=1, help="accepted for symmetry with predict; scoring is serial")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("audit", help="annotation consistency and span-shape audit")
    s.add_argument("corpus")
    s.add_argument("--pred")
    s.add_argument("--min-total", type=int, default=2)
    s.set_defaults(func=cmd_audit)

    s = sub.add_parser("kfold", help="write seeded k-fold train/heldout files")
    s.add_argument("corpus")
    s.add_argument("-k", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_kfold)

    s = sub.add_parser("synth", help="generate a synthetic corpus with a fixed toxic lexicon")
    s.add_argument("out")
    s.add_argument("-n", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except (InputError, cp.CorpusFormatError, models.ModelFormatError) as exc:
        print(f"toxspans: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"toxspans: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # invariant violations surface as exit code 2
        log.exception("internal error")
        print(f"toxspans: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
