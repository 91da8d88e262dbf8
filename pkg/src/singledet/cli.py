"""Command-line interface.

Subcommands: ``stats`` (corpus counts as JSON), ``synth`` (generate
corpora/embeddings), ``train`` (fit and checkpoint a model), ``eval``
(score a checkpoint against a labeled corpus), ``predict`` (emit JSON
lines for an unlabeled corpus), and ``sweep`` (one-axis comparisons).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .corpus import SplitSpec, corpus_stats, load_corpus, save_corpus, split
from .embeddings import load_word_vectors, save_word_vectors
from .features import FeatureConfig, encode_corpus, parse_feature_groups
from .metrics import ClassReport, percent, report
from .model import ModelConfig, build_model, load_model, save_model
from .nn import OPTIMIZER_KINDS
from .synthetic import (
    fixture_embeddings,
    random_label_corpus,
    scale_corpus,
    separable_corpus,
)
from .training import (
    SweepAxis,
    TrainConfig,
    TrainingError,
    evaluate,
    sweep,
    train,
)

log = logging.getLogger(__name__)

__all__ = ["main", "build_parser"]


def _add_embedding_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--embeddings", required=True, help="word2vec text file")
    p.add_argument("--max-words", type=int, default=None,
                   help="load at most this many words")


def _add_feature_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--context-mode", choices=["two", "all"], default="two")
    p.add_argument("--features", default="words,context,syntactic",
                   help="comma subset of words,context,syntactic")
    p.add_argument("--max-mention-len", type=int, default=10)
    p.add_argument("--context-len", type=int, default=10)


def _add_train_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--optimizer", choices=list(OPTIMIZER_KINDS), default="adam")
    p.add_argument("--seed", type=int, default=0)


def _add_split_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--val-fraction", type=float, default=0.2,
                   help="fraction of the non-test documents")
    p.add_argument("--split-seed", type=int, default=None,
                   help="defaults to --seed")


def _load_table(args):
    return load_word_vectors(args.embeddings, max_words=args.max_words)


def _split_spec(args) -> SplitSpec:
    seed = args.split_seed if args.split_seed is not None else args.seed
    return SplitSpec(
        test_fraction=args.test_fraction,
        validation_fraction_of_train=args.val_fraction,
        seed=seed,
    )


def _feature_label(cfg) -> str:
    parts = []
    if cfg.use_words:
        parts.append("words")
    if cfg.use_context:
        parts.append("context")
    if cfg.use_syntactic:
        parts.append("syntactic")
    return "+".join(parts)


def _feature_config_for_model(cfg: ModelConfig, context_mode: str) -> FeatureConfig:
    """Encoding settings implied by a checkpoint; only the context mode is
    not recorded there and must be supplied to match training."""
    return FeatureConfig(
        max_mention_len=cfg.max_mention_len,
        context_mode=context_mode,
        context_len=cfg.context_len,
        use_words=cfg.use_words,
        use_context=cfg.use_context,
        use_syntactic=cfg.use_syntactic,
    )


def cmd_stats(args) -> int:
    corpus = load_corpus(args.corpus)
    print(json.dumps(corpus_stats(corpus)))
    return 0


def cmd_synth(args) -> int:
    if args.kind == "separable":
        corpus = separable_corpus(args.mentions, seed=args.seed,
                                  doc_prefix=args.doc_prefix)
    elif args.kind == "random":
        corpus = random_label_corpus(args.mentions, seed=args.seed,
                                     doc_prefix=args.doc_prefix)
    else:
        corpus = scale_corpus(args.docs, args.sentences, args.tokens,
                              seed=args.seed)
    save_corpus(corpus, args.out)
    if args.embeddings_out:
        save_word_vectors(fixture_embeddings(dim=args.dim, seed=args.seed),
                          args.embeddings_out)
    print(json.dumps(corpus_stats(corpus)))
    return 0


def _encode_splits(corpus, table, fcfg, spec):
    train_m, val_m, test_m = split(corpus, spec)
    return (
        encode_corpus(train_m, corpus, table, fcfg),
        encode_corpus(val_m, corpus, table, fcfg),
        encode_corpus(test_m, corpus, table, fcfg),
    )


def cmd_train(args) -> int:
    table = _load_table(args)
    corpus = load_corpus(args.corpus)
    flags = parse_feature_groups(args.features)
    fcfg = FeatureConfig(
        max_mention_len=args.max_mention_len,
        context_mode=args.context_mode,
        context_len=args.context_len,
        **flags,
    )
    train_set, val_set, _ = _encode_splits(corpus, table, fcfg, _split_spec(args))
    mcfg = ModelConfig(
        embed_dim=table.dim,
        max_mention_len=args.max_mention_len,
        context_len=args.context_len,
        seed=args.seed,
        **flags,
    )
    model = build_model(mcfg, table)
    tcfg = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        optimizer=args.optimizer,
        shuffle_seed=args.seed,
    )
    history = train(model, train_set, val_set, tcfg)
    save_model(model, args.out)
    if args.history:
        history.save_csv(args.history)
    final = history.final
    print(
        f"trained {tcfg.epochs} epochs on {len(train_set)} mentions: "
        f"train_acc={final.train_accuracy:.4f} val_acc={final.val_accuracy:.4f}"
    )
    print(f"checkpoint written to {args.out}")
    if args.history:
        print(f"history written to {args.history}")
    return 0


def _render_eval_table(label: str, rep: ClassReport) -> str:
    c0, c1 = rep.per_class
    width = max(len(label), len("features")) + 2
    lines = [
        f"{'features':<{width}} {'Non-Singleton':>18} {'Singleton':>18}",
        f"{'':<{width}} {'P':>8}{'R':>5}{'F':>5} {'P':>8}{'R':>5}{'F':>5}",
        (
            f"{label:<{width}} "
            f"{percent(c0.precision):>8}{percent(c0.recall):>5}{percent(c0.f_measure):>5} "
            f"{percent(c1.precision):>8}{percent(c1.recall):>5}{percent(c1.f_measure):>5}"
        ),
        f"Accuracy: {rep.accuracy * 100:.2f}%",
    ]
    return "\n".join(lines)


def _report_payload(label: str, rep: ClassReport, loss: float) -> dict:
    return {
        "features": label,
        "beta": rep.beta,
        "loss": loss,
        "accuracy": rep.accuracy,
        "per_class": {
            name: {
                "precision": m.precision,
                "recall": m.recall,
                "f_measure": m.f_measure,
                "precision_undefined": m.precision_undefined,
                "recall_undefined": m.recall_undefined,
            }
            for name, m in zip(("non_singleton", "singleton"), rep.per_class)
        },
    }


def _load_for_inference(args) -> tuple:
    table = _load_table(args)
    model = load_model(args.model, table)
    fcfg = _feature_config_for_model(model.config, args.context_mode)
    return table, model, fcfg


def cmd_eval(args) -> int:
    table, model, fcfg = _load_for_inference(args)
    corpus = load_corpus(args.corpus)
    examples = encode_corpus(corpus.mentions, corpus, table, fcfg)
    loss, preds = evaluate(model, examples)
    rep = report(preds, [ex.label for ex in examples], beta=args.beta)
    label = _feature_label(model.config)
    if args.format == "json":
        print(json.dumps(_report_payload(label, rep, loss)))
    else:
        print(_render_eval_table(label, rep))
    return 0


def cmd_predict(args) -> int:
    table, model, fcfg = _load_for_inference(args)
    corpus = load_corpus(args.corpus, require_labels=False)
    examples = encode_corpus(corpus.mentions, corpus, table, fcfg)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for m, ex in zip(corpus.mentions, examples):
            probs = model.forward(ex, training=False)
            line = {
                "mention": {
                    "doc_id": m.doc_id,
                    "sentence": m.sentence_index,
                    "start": m.start,
                    "end": m.end,
                    "text": " ".join(corpus.mention_tokens(m)),
                },
                "p_singleton": float(probs[1]),
                "label": int(probs[1] > probs[0]),
            }
            print(json.dumps(line, ensure_ascii=False), file=out)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _render_sweep_table(rows) -> str:
    width = max([len("value")] + [len(r.value) for r in rows]) + 2
    lines = [f"{'value':<{width}}{'val_loss':>10}{'val_acc':>9}{'singleton_F':>13}"]
    for r in rows:
        lines.append(
            f"{r.value:<{width}}{r.val_loss:>10.4f}{r.val_accuracy:>9.4f}"
            f"{r.singleton_f1:>13.4f}"
        )
    return "\n".join(lines)


def cmd_sweep(args) -> int:
    table = _load_table(args)
    corpus = load_corpus(args.corpus)
    flags = parse_feature_groups(args.features)
    fcfg = FeatureConfig(
        max_mention_len=args.max_mention_len,
        context_mode=args.context_mode,
        context_len=args.context_len,
        **flags,
    )
    mcfg = ModelConfig(
        embed_dim=table.dim,
        max_mention_len=args.max_mention_len,
        context_len=args.context_len,
        seed=args.seed,
        **flags,
    )
    tcfg = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        optimizer=args.optimizer,
        shuffle_seed=args.seed,
    )
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    rows = sweep(
        corpus,
        table,
        args.axis,
        values,
        model_cfg=mcfg,
        train_cfg=tcfg,
        feature_cfg=fcfg,
        split_spec=_split_spec(args),
    )
    if args.format == "json":
        print(json.dumps([row.__dict__ for row in rows]))
    else:
        print(_render_sweep_table(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="singledet",
        description="Train and evaluate a singleton-mention classifier.",
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="print corpus counts as JSON")
    p.add_argument("--corpus", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="generate a corpus (and embeddings)")
    p.add_argument("--kind", choices=["separable", "random", "scale"],
                   default="separable")
    p.add_argument("--mentions", type=int, default=500)
    p.add_argument("--docs", type=int, default=275)
    p.add_argument("--sentences", type=int, default=3600)
    p.add_argument("--tokens", type=int, default=78_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--doc-prefix", default="doc")
    p.add_argument("--out", required=True, help="corpus JSONL path")
    p.add_argument("--embeddings-out", default=None,
                   help="also write covering word vectors here")
    p.add_argument("--dim", type=int, default=50,
                   help="dimension for --embeddings-out")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a model and write a checkpoint")
    p.add_argument("--corpus", required=True)
    _add_embedding_args(p)
    _add_feature_args(p)
    _add_train_args(p)
    _add_split_args(p)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--history", default=None, help="write per-epoch CSV here")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a checkpoint on a labeled corpus")
    p.add_argument("--model", required=True, help="checkpoint path")
    p.add_argument("--corpus", required=True)
    _add_embedding_args(p)
    p.add_argument("--context-mode", choices=["two", "all"], default="two",
                   help="must match the mode used at training time")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="emit JSON lines for an unlabeled corpus")
    p.add_argument("--model", required=True, help="checkpoint path")
    p.add_argument("--corpus", required=True)
    _add_embedding_args(p)
    p.add_argument("--context-mode", choices=["two", "all"], default="two",
                   help="must match the mode used at training time")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("sweep", help="compare values along one axis")
    p.add_argument("--corpus", required=True)
    _add_embedding_args(p)
    _add_feature_args(p)
    _add_train_args(p)
    _add_split_args(p)
    p.add_argument("--axis", choices=[a.value for a in SweepAxis],
                   required=True)
    p.add_argument("--values", required=True,
                   help="comma-separated values for the axis")
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ValueError, OSError, TrainingError) as err:
        # covers CorpusError, EmbeddingError, and CheckpointError too
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
