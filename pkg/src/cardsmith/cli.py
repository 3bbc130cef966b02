"""Single entry point driving every pipeline stage as a subcommand.

Every subcommand is replayable (same config and seeds give the same
outputs), reads a TOML config via --config with flags taking precedence,
and exits 0 on success, 1 with a one-line error on failure, 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import load_config_file, resolve_options, validate_config
from .errors import CardsmithError, ConfigError
from .prediction import PredictionVector

DEFAULTS: dict[str, dict] = {
    "ingest": {"format": None, "out": "parsed_corpus.json", "rejects": None},
    "stats": {"format": None, "out_dir": None},
    "build-dataset": {
        "height": 32, "width": 32, "train_fraction": 5 / 6, "seed": 0,
        "augment_ratio": 0.2, "crop_margin": 4, "displacement": 4,
        "records_per_batch": 10000, "format": None,
    },
    "train-image": {
        "labels": None, "epochs": 30, "learning_rate": 0.01, "batch_size": 128,
        "seed": 0, "report": None,
    },
    "train-text": {
        "epochs": 10, "learning_rate": 1e-3, "batch_size": 64, "max_len": 128,
        "min_count": 1, "embedding_dim": 128, "train_fraction": 5 / 6, "seed": 0,
        "report": None, "format": None,
    },
    "train-generator": {
        "epochs": 20, "learning_rate": 2e-3, "hidden_size": 256, "layers": 2,
        "sequence_length": 200, "batch_size": 32, "seed": 0, "report": None, "format": None,
    },
    "build-bank": {"count": 30000, "temperature": 0.8, "seed": 0},
    "classify-image": {"out": None},
    "classify-text": {"text": None, "text_file": None, "out": None},
    "match": {
        "k": 1, "color_weight": 1.0, "type_weight": 1.0,
        "include_malformed": None, "out": None,
    },
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cardsmith", description=__doc__)
    parser.add_argument("--version", action="version", version=f"cardsmith {__version__}")
    parser.add_argument("--seed", dest="global_seed", type=int,
                        help="global seed feeding every stage (subcommand --seed overrides)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="TOML config file; flags override its values")
        p.add_argument("-v", "--verbose", action="store_true", help="print the effective config")

    p = sub.add_parser("ingest", help="parse a corpus file and persist the normalized cards")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--out")
    p.add_argument("--rejects", help="rejects report path (default: <out>.rejects.txt)")
    common(p)

    p = sub.add_parser("stats", help="color/type distribution report")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--out-dir", dest="out_dir", help="write stats.csv and distribution figures here")
    common(p)

    p = sub.add_parser("build-dataset", help="expand labels, decode images, split, write batches")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--images", required=True, help="directory of <card_id>.jpg/.png files")
    p.add_argument("--labels", required=True, choices=["color", "type"])
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--height", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--train-fraction", dest="train_fraction", type=float)
    p.add_argument("--augment-ratio", dest="augment_ratio", type=float)
    p.add_argument("--crop-margin", dest="crop_margin", type=int)
    p.add_argument("--displacement", type=int)
    p.add_argument("--records-per-batch", dest="records_per_batch", type=int)
    p.add_argument("--seed", type=int)
    common(p)

    p = sub.add_parser("train-image", help="train the image CNN on built batches")
    p.add_argument("--train", required=True, help="train batch directory")
    p.add_argument("--eval", required=True, help="eval batch directory")
    p.add_argument("--out", required=True, help="model artifact path")
    p.add_argument("--labels", choices=["color", "type"], help="cross-check against the batch manifest")
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--report", help="train report JSONL path (default: <out>.report.jsonl)")
    common(p)

    p = sub.add_parser("train-text", help="train the text CNN from the corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--labels", required=True, choices=["color", "type"])
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--max-len", dest="max_len", type=int)
    p.add_argument("--min-count", dest="min_count", type=int)
    p.add_argument("--embedding-dim", dest="embedding_dim", type=int)
    p.add_argument("--train-fraction", dest="train_fraction", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--report")
    common(p)

    p = sub.add_parser("train-generator", help="train the character-level generator")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--hidden-size", dest="hidden_size", type=int)
    p.add_argument("--layers", type=int)
    p.add_argument("--sequence-length", dest="sequence_length", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--report")
    common(p)

    p = sub.add_parser("build-bank", help="sample, decode, and classify generated cards")
    p.add_argument("--generator", required=True)
    p.add_argument("--color-model", dest="color_model", required=True)
    p.add_argument("--type-model", dest="type_model", required=True)
    p.add_argument("--out", required=True, help="bank JSONL path")
    p.add_argument("--count", type=int)
    p.add_argument("--temperature", type=float)
    p.add_argument("--seed", type=int)
    common(p)

    p = sub.add_parser("classify-image", help="prediction vector for one image")
    p.add_argument("--model", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--out", help="write the vector as JSON here")
    common(p)

    p = sub.add_parser("classify-text", help="prediction vector for raw card text")
    p.add_argument("--model", required=True)
    p.add_argument("--text")
    p.add_argument("--text-file", dest="text_file")
    p.add_argument("--out")
    common(p)

    p = sub.add_parser("match", help="match an input image to the closest generated card")
    p.add_argument("--bank", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--color-model", dest="color_model", required=True)
    p.add_argument("--type-model", dest="type_model", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--color-weight", dest="color_weight", type=float)
    p.add_argument("--type-weight", dest="type_weight", type=float)
    p.add_argument("--include-malformed", dest="include_malformed", action="store_const", const=True)
    p.add_argument("--out", help="write match JSON here")
    common(p)

    return parser


def _command_keys() -> dict[str, set[str]]:
    keys: dict[str, set[str]] = {}
    parser = build_parser()
    sub_actions = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]
    for name, sp in sub_actions[0].choices.items():
        dests = {a.dest for a in sp._actions if a.dest not in ("help", "config", "verbose")}
        keys[name] = dests
    return keys


def _resolve(args) -> object:
    config = load_config_file(args.config) if args.config else {}
    command_keys = _command_keys()
    validate_config(config, command_keys)
    dests = command_keys[args.command]
    return resolve_options(args, args.command, dests, DEFAULTS.get(args.command, {}), config)


def _print_vector(vector: PredictionVector) -> None:
    for label, score in sorted(vector.as_dict().items(), key=lambda kv: -kv[1]):
        print(f"  {label:<16}{100 * score:6.2f}%")


def _write_json(payload: dict, path: str | None) -> None:
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(json.dumps(payload, indent=1), encoding="utf-8")


# ---------------------------------------------------------------------------
# Subcommand handlers


def cmd_ingest(opts) -> int:
    from .corpus import load_corpus, save_corpus, write_rejects_report

    load = load_corpus(opts.corpus, opts.format)
    out = Path(opts.out)
    save_corpus(load, out)
    rejects_path = Path(opts.rejects) if opts.rejects else out.with_suffix(out.suffix + ".rejects.txt")
    write_rejects_report(load.rejects, rejects_path)
    print(f"ingested {len(load.corpus.cards)} cards, {len(load.rejects)} rejects -> {out}")
    return 0


def cmd_stats(opts) -> int:
    from .corpus import corpus_stats, format_stats_table, load_corpus, write_stats_csv
    from .report import plot_distribution

    load = load_corpus(opts.corpus, opts.format)
    stats = corpus_stats(load.corpus)
    print(format_stats_table(stats))
    if opts.out_dir:
        out_dir = Path(opts.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_stats_csv(stats, out_dir / "stats.csv")
        color_rows = sorted(stats.color_counts.items(), key=lambda kv: (-kv[1], kv[0]))
        type_rows = sorted(stats.type_counts.items(), key=lambda kv: (-kv[1], kv[0]))
        plot_distribution(color_rows, "color identity distribution", out_dir / "color_distribution.png")
        plot_distribution(type_rows, "type distribution", out_dir / "type_distribution.png")
        print(f"report written to {out_dir}")
    return 0


def cmd_build_dataset(opts) -> int:
    from . import build_dataset

    summary = build_dataset.build(
        corpus_path=opts.corpus,
        corpus_format=opts.format,
        images_dir=opts.images,
        labeling=opts.labels,
        out_dir=opts.out,
        height=opts.height,
        width=opts.width,
        train_fraction=opts.train_fraction,
        augment_ratio=opts.augment_ratio,
        crop_margin=opts.crop_margin,
        displacement=opts.displacement,
        records_per_batch=opts.records_per_batch,
        seed=opts.seed,
    )
    print(summary)
    return 0


def cmd_train_image(opts) -> int:
    from .batches import open_batch_set
    from .image_model import CNNConfig, save_model, train
    from .report import plot_training_curves, write_report

    train_set = open_batch_set(opts.train)
    eval_set = open_batch_set(opts.eval)
    if opts.labels and opts.labels != train_set.label_set:
        raise ConfigError(f"--labels {opts.labels} does not match batch manifest {train_set.label_set!r}")
    config = CNNConfig(
        label_set=train_set.label_set,
        height=train_set.height,
        width=train_set.width,
        epochs=opts.epochs,
        learning_rate=opts.learning_rate,
        batch_size=opts.batch_size,
        seed=opts.seed,
    )
    model, report = train(config, train_set, eval_set)
    save_model(model, opts.out)
    report_path = Path(opts.report) if opts.report else Path(opts.out + ".report.jsonl")
    write_report(report, report_path)
    plot_training_curves(report, report_path.with_suffix(".png"))
    print(f"trained image model ({config.label_set}) -> {opts.out}; final accuracy {report.final_accuracy:.4f}")
    return 0


def cmd_train_text(opts) -> int:
    from . import text_pipeline

    final_accuracy = text_pipeline.train_from_corpus(opts)
    print(f"trained text model ({opts.labels}) -> {opts.out}; final accuracy {final_accuracy:.4f}")
    return 0


def cmd_train_generator(opts) -> int:
    from .corpus import load_corpus
    from .generator import GeneratorConfig, encode_corpus, save_generator, train_generator
    from .report import plot_training_curves, write_report

    load = load_corpus(opts.corpus, opts.format)
    stream = encode_corpus(load.corpus)
    config = GeneratorConfig(
        hidden_size=opts.hidden_size,
        layers=opts.layers,
        sequence_length=opts.sequence_length,
        learning_rate=opts.learning_rate,
        epochs=opts.epochs,
        batch_size=opts.batch_size,
        seed=opts.seed,
    )
    model, chars, report = train_generator(config, stream)
    save_generator(model, chars, opts.out)
    report_path = Path(opts.report) if opts.report else Path(opts.out + ".report.jsonl")
    write_report(report, report_path)
    plot_training_curves(report, report_path.with_suffix(".png"))
    print(f"trained generator -> {opts.out}; final loss {report.epochs[-1].train_loss:.4f} nats/char")
    return 0


def cmd_build_bank(opts) -> int:
    from .generator import build_card_bank

    manifest = build_card_bank(
        opts.generator, opts.count, opts.color_model, opts.type_model, opts.out,
        temperature=opts.temperature, seed=opts.seed,
    )
    print(f"bank of {opts.count} written to {opts.out}; malformed rate {manifest['malformed_rate']:.3f}")
    return 0


def cmd_classify_image(opts) -> int:
    from .image_model import load_model, predict
    from .images import decode_and_resize

    model = load_model(opts.model)
    image_path = Path(opts.image)
    if not image_path.exists():
        raise ConfigError(f"image not found: {image_path}")
    pixels = decode_and_resize(image_path.read_bytes(), (model.config.height, model.config.width))
    vector = predict(model, pixels)
    print(f"{model.config.label_set} prediction for {image_path.name}:")
    _print_vector(vector)
    _write_json({"label_set": model.config.label_set, "scores": vector.as_dict()}, opts.out)
    return 0


def cmd_classify_text(opts) -> int:
    from .text_model import load_text_model, predict_text

    if (opts.text is None) == (opts.text_file is None):
        raise ConfigError("provide exactly one of --text or --text-file")
    text = opts.text if opts.text is not None else Path(opts.text_file).read_text(encoding="utf-8")
    model, vocab = load_text_model(opts.model)
    vector = predict_text(model, vocab, text)
    print(f"{model.config.label_set} prediction:")
    _print_vector(vector)
    _write_json({"label_set": model.config.label_set, "scores": vector.as_dict()}, opts.out)
    return 0


def cmd_match(opts) -> int:
    from .image_model import load_model, predict
    from .images import decode_and_resize
    from .matcher import MatchQuery, load_bank, match, match_output, render_entry

    image_path = Path(opts.image)
    if not image_path.exists():
        raise ConfigError(f"image not found: {image_path}")
    image_bytes = image_path.read_bytes()
    color_model = load_model(opts.color_model)
    type_model = load_model(opts.type_model)
    if color_model.config.label_set != "color":
        raise ConfigError(f"--color-model has label set {color_model.config.label_set!r}")
    if type_model.config.label_set != "type":
        raise ConfigError(f"--type-model has label set {type_model.config.label_set!r}")
    color_pred = predict(color_model, decode_and_resize(image_bytes, (color_model.config.height, color_model.config.width)))
    type_pred = predict(type_model, decode_and_resize(image_bytes, (type_model.config.height, type_model.config.width)))
    query = MatchQuery(color_pred, type_pred, weights=(opts.color_weight, opts.type_weight), k=opts.k)
    bank = load_bank(opts.bank)
    results = match(query, bank, include_malformed=bool(opts.include_malformed))
    by_index = {e.bank_index: e for e in bank}
    for result in results:
        print(render_entry(by_index[result.bank_index], result))
        print()
    _write_json(match_output(query, results), opts.out)
    return 0


HANDLERS = {
    "ingest": cmd_ingest,
    "stats": cmd_stats,
    "build-dataset": cmd_build_dataset,
    "train-image": cmd_train_image,
    "train-text": cmd_train_text,
    "train-generator": cmd_train_generator,
    "build-bank": cmd_build_bank,
    "classify-image": cmd_classify_image,
    "classify-text": cmd_classify_text,
    "match": cmd_match,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        opts = _resolve(args)
        if args.verbose:
            effective = {k: v for k, v in vars(opts).items()}
            print(f"config: {json.dumps(effective, default=str, sort_keys=True)}")
        return HANDLERS[args.command](opts)
    except CardsmithError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())
