"""Command-line entry point: ``doublecheck <subcommand> [flags]``.

Exit status is 0 on success, 1 when inputs fail validation and 2 on usage
errors. Primary outputs are deterministic for a fixed ``--seed``.
"""
import argparse
import json
import os
import sys

from . import __version__
from .checkpoint import load_checkpoint, save_checkpoint
from .datapipe import (
    CharVocab,
    cooccurrence_embeddings,
    curate,
    encode_records,
    load_embeddings,
    load_keywords,
    load_records,
    save_records,
    stats,
    write_curation,
)
from .datapipe.records import detect_format
from .diagnostics import gradcheck_suite, salience_spans
from .errors import DoubleCheckError
from .metrics import dump_json, length_split_eval, metrics_report
from .model import DoubleCheckModel, ModelConfig
from .synthetic import planted_corpus
from .train import TrainConfig, predict_labels, train

MODES = {"full": "full", "no-salience": "no_salience"}


class UsageError(Exception):
    """Raised for flag combinations argparse cannot express."""


class InputError(DoubleCheckError):
    """A record file failed validation; the message names the file."""


def _common(p):
    p.add_argument("--seed", type=int, default=0, help="seed for every random choice (default 0)")
    p.add_argument("--format", choices=("csv", "jsonl"), default=None,
                   help="record format; inferred from the file extension when omitted")


def _model_flags(p):
    p.add_argument("--embed-dim", type=int, default=300, help="embedding width (default 300)")
    p.add_argument("--hidden-dim", type=int, default=128, help="LSTM hidden size (default 128)")
    p.add_argument("--seq-len", type=int, default=256, help="characters read per text (default 256)")
    p.add_argument("--dropout", type=float, default=0.5, help="dropout rate on the pooled context (default 0.5)")
    p.add_argument("--sigma", type=float, default=1.0, help="Gaussian smoothing width (default 1.0)")
    p.add_argument("--mode", choices=tuple(MODES), default="full",
                   help="full model or the ablation without input re-weighting (default full)")
    p.add_argument("--no-grad-through-alpha", action="store_true",
                   help="treat the re-weighting factors as constants during backprop")
    p.add_argument("--smooth-second", action="store_true", help="also smooth the second-stage attention")


def build_parser():
    parser = argparse.ArgumentParser(prog="doublecheck", description="Curate news corpora, train and apply the two-stage salience classifier.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("curate", help="fill headers, filter, deduplicate and split a labeled corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="output directory")
    p.add_argument("--min-chars", type=int, default=80, help="minimum text length kept (default 80)")
    p.add_argument("--dedup-threshold", type=float, default=0.8,
                   help="bigram cosine above which two texts are duplicates (default 0.8)")
    p.add_argument("--keywords", default=None, help="keyword JSON; falls back to $DOUBLECHECK_KEYWORDS")
    p.add_argument("--no-stratify", action="store_true", help="split without preserving label ratios")
    _common(p)

    p = sub.add_parser("stats", help="length statistics per label and keyword coverage")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None, help="directory for stats.json, boxplot.tsv and keywords.tsv")
    p.add_argument("--keywords", default=None)
    _common(p)

    p = sub.add_parser("train", help="train a classifier and write a checkpoint and a log")
    p.add_argument("--input", required=True,
                   help="training records, or a curate output directory holding train and validation files")
    p.add_argument("--validation", default=None, help="validation records (required unless --input is a directory)")
    p.add_argument("--checkpoint", required=True, help="checkpoint path to write (.npz)")
    p.add_argument("--output", default=None, help="training log path (default: checkpoint path + .log.tsv)")
    p.add_argument("--lr", type=float, default=0.001, help="learning rate (default 0.001)")
    p.add_argument("--batch-size", type=int, default=128, help="mini-batch size (default 128)")
    p.add_argument("--epochs", type=int, default=20, help="passes over the training set (default 20)")
    p.add_argument("--patience", type=int, default=1000,
                   help="stop after this many batches without validation improvement (default 1000)")
    p.add_argument("--optimizer", choices=("sgd", "adam"), default="sgd", help="update rule (default sgd)")
    p.add_argument("--class-weights", type=float, nargs=2, metavar=("FAKE", "REAL"), default=None)
    p.add_argument("--eval-every", type=int, default=50, help="validate every N batches (default 50)")
    emb = p.add_mutually_exclusive_group()
    emb.add_argument("--embeddings", default=None, help="pretrained vectors in word2vec text format")
    emb.add_argument("--corpus-embeddings", action="store_true",
                     help="initialize embeddings from co-occurrence statistics of the training texts")
    p.add_argument("--freeze-embeddings", action="store_true")
    _model_flags(p)
    _common(p)

    p = sub.add_parser("evaluate", help="score a labeled file with a checkpoint")
    p.add_argument("--input", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--output", default=None, help="also write the report as JSON")
    _common(p)

    p = sub.add_parser("predict", help="label records and show their most salient character spans")
    p.add_argument("--input", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--output", default=None, help="JSON-lines output (default stdout)")
    p.add_argument("--top-spans", type=int, default=5, help="salient spans per record (default 5)")
    _common(p)

    p = sub.add_parser("pretest", help="compare metrics on short and long texts")
    p.add_argument("--input", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--boundary", type=int, action="append", default=None,
                   help="length boundary in characters; repeatable (default 80 and 100)")
    p.add_argument("--output", default=None, help="also write the reports as JSON")
    _common(p)

    p = sub.add_parser("gradcheck", help="finite-difference checks of the primitives and the full model")
    p.add_argument("--seeds", type=int, default=1, help="number of model seeds checked (default 1)")
    _common(p)

    p = sub.add_parser("synth", help="write a planted-marker corpus for demos and smoke tests")
    p.add_argument("--output", required=True)
    p.add_argument("--n", type=int, default=2000, help="number of records (default 2000)")
    p.add_argument("--fake-fraction", type=float, default=0.25)
    _common(p)
    return parser


def _records(path, fmt):
    try:
        return load_records(path, fmt)
    except DoubleCheckError as exc:
        raise InputError(f"{path}: {exc}") from exc


def cmd_curate(args):
    records = _records(args.input, args.format)
    result = curate(records, load_keywords(args.keywords), min_chars=args.min_chars,
                    threshold=args.dedup_threshold, seed=args.seed, stratify=not args.no_stratify)
    write_curation(result, args.output, args.format or detect_format(args.input))
    print(result.report())


def cmd_stats(args):
    result = stats(_records(args.input, args.format), load_keywords(args.keywords))
    print(result.to_text())
    if args.output:
        os.makedirs(args.output, exist_ok=True)
        dump_json(result, os.path.join(args.output, "stats.json"))
        with open(os.path.join(args.output, "boxplot.tsv"), "w", encoding="utf-8") as fh:
            fh.write(result.boxplot_tsv())
        with open(os.path.join(args.output, "keywords.tsv"), "w", encoding="utf-8") as fh:
            fh.write(result.keywords_tsv())


def _find_part(directory, name):
    for ext in ("csv", "jsonl"):
        path = os.path.join(directory, f"{name}.{ext}")
        if os.path.exists(path):
            return path
    raise UsageError(f"{directory}: no {name}.csv or {name}.jsonl")


def cmd_train(args):
    if os.path.isdir(args.input):
        train_path, val_path = _find_part(args.input, "train"), args.validation or _find_part(args.input, "validation")
    else:
        if not args.validation:
            raise UsageError("--validation is required when --input is a file")
        train_path, val_path = args.input, args.validation
    train_records = _records(train_path, args.format)
    val_records = _records(val_path, args.format)
    vocab = CharVocab.build(r.text for r in train_records)
    config = ModelConfig(vocab_size=len(vocab), embed_dim=args.embed_dim, hidden_dim=args.hidden_dim,
                         seq_len=args.seq_len, dropout_rate=args.dropout, gaussian_sigma=args.sigma,
                         salience_mode=MODES[args.mode], grad_through_alpha=not args.no_grad_through_alpha,
                         smooth_second=args.smooth_second, freeze_embeddings=args.freeze_embeddings)
    model = DoubleCheckModel(config, seed=args.seed)
    if args.embeddings:
        table, hits = load_embeddings(args.embeddings, dim=args.embed_dim).matrix_for(vocab)
        model.params["embedding"].data = table
        print(f"embeddings: {hits}/{len(vocab)} characters found in {args.embeddings}", file=sys.stderr)
    elif args.corpus_embeddings:
        model.params["embedding"].data = cooccurrence_embeddings(
            [r.text for r in train_records], vocab, args.embed_dim).vectors
    cfg = TrainConfig(batch_size=args.batch_size, epochs=args.epochs, learning_rate=args.lr,
                      patience_batches=args.patience, seed=args.seed, optimizer=args.optimizer,
                      class_weights=args.class_weights, eval_every=args.eval_every)
    train_set = encode_records(train_records, vocab, config.seq_len)
    val_set = encode_records(val_records, vocab, config.seq_len)
    log_path = args.output or f"{args.checkpoint}.log.tsv"
    model, history = train(train_set, val_set, model, cfg, log_path=log_path)
    save_checkpoint(args.checkpoint, model, vocab, {"train_config": cfg.to_dict()})
    print(f"stop_reason={history.stop_reason}")
    print(f"batches={history.batches_run}")
    print(f"best_val_accuracy={history.best_accuracy:.4f}")


def _score(model, vocab, records):
    ids, _ = encode_records(records, vocab, model.config.seq_len)
    return predict_labels(model, ids)


def cmd_evaluate(args):
    model, vocab, _ = load_checkpoint(args.checkpoint)
    records = _records(args.input, args.format)
    report = metrics_report(_score(model, vocab, records), [r.label for r in records])
    print(report.to_text())
    if args.output:
        dump_json(report, args.output)


def cmd_predict(args):
    model, vocab, _ = load_checkpoint(args.checkpoint)
    records = _records(args.input, args.format)
    ids, _ = encode_records(records, vocab, model.config.seq_len)
    lines = []
    for start in range(0, len(records), 256):
        out = model(ids[start:start + 256])
        alpha = out.attention.alpha.data
        for k, rec in enumerate(records[start:start + 256]):
            probs = out.probs.data[k]
            spans = salience_spans(alpha[k], rec.text[:model.config.seq_len], args.top_spans)
            lines.append(json.dumps({
                "id": rec.id,
                "label": int(out.labels[k]),
                "fake_probability": round(float(probs[0]), 6),
                "spans": [s.to_dict() for s in spans],
            }, ensure_ascii=False))
    text = "\n".join(lines)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + ("\n" if text else ""))
    else:
        print(text)


def cmd_pretest(args):
    model, vocab, _ = load_checkpoint(args.checkpoint)
    records = _records(args.input, args.format)
    predictions = _score(model, vocab, records)
    reports = [length_split_eval(records, predictions, b) for b in (args.boundary or [80, 100])]
    print("\n\n".join(r.to_text() for r in reports))
    if args.output:
        dump_json({"reports": [r.to_dict() for r in reports]}, args.output)


def cmd_gradcheck(args):
    results = gradcheck_suite(args.seed, [args.seed + i for i in range(max(1, args.seeds))])
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"checks={len(results)} failed={len(failed)}")
    return 1 if failed else 0


def cmd_synth(args):
    records = planted_corpus(args.n, fake_fraction=args.fake_fraction, seed=args.seed)
    save_records(records, args.output, args.format)
    print(f"wrote {len(records)} records to {args.output}")


COMMANDS = {
    "curate": cmd_curate, "stats": cmd_stats, "train": cmd_train, "evaluate": cmd_evaluate,
    "predict": cmd_predict, "pretest": cmd_pretest, "gradcheck": cmd_gradcheck, "synth": cmd_synth,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        status = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except (DoubleCheckError, OSError, UnicodeDecodeError) as exc:
        if isinstance(exc, OSError) and exc.filename:
            msg = f"{exc.filename}: {exc.strerror}"
        else:
            msg = str(exc)
        print(f"doublecheck {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return status or 0


if __name__ == "__main__":
    sys.exit(main())
