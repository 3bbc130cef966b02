"""Text training stage: corpus -> vocabulary -> encoded samples -> text CNN."""

from __future__ import annotations

from pathlib import Path

from .corpus import load_corpus
from .datasets import SplitSpec, expand_multilabel, split
from .report import plot_training_curves, write_report
from .text_model import TextCNNConfig, save_text_model, train_text
from .textenc import TextSample, build_text_vocab, classifier_text, encode_text


def train_from_corpus(opts) -> float:
    """Build vocab and samples from the corpus, train, persist artifact and
    report, and return the final eval accuracy."""
    load = load_corpus(opts.corpus, opts.format)
    texts = {c.id: classifier_text(c.type_line, c.rules_text, c.name) for c in load.corpus.cards}
    vocab = build_text_vocab(texts.values(), min_count=opts.min_count)

    pairs = expand_multilabel(load.corpus, opts.labels)
    samples = [
        TextSample(token_ids=encode_text(texts[cid], vocab, opts.max_len), label_id=label, card_id=cid)
        for cid, label in pairs
    ]
    train_samples, eval_samples = split(samples, SplitSpec(opts.train_fraction, opts.seed))

    config = TextCNNConfig(
        label_set=opts.labels,
        vocab_size=len(vocab),
        embedding_dim=opts.embedding_dim,
        max_len=opts.max_len,
        learning_rate=opts.learning_rate,
        epochs=opts.epochs,
        batch_size=opts.batch_size,
        seed=opts.seed,
    )
    model, report = train_text(config, train_samples, eval_samples)
    save_text_model(model, vocab, opts.out)
    report_path = Path(opts.report) if opts.report else Path(opts.out + ".report.jsonl")
    write_report(report, report_path)
    plot_training_curves(report, report_path.with_suffix(".png"))
    return report.final_accuracy
