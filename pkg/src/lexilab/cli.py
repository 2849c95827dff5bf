"""lexilab command line: tokenizers, training, stimuli, evaluation, analysis.

Exit codes: 0 ok, 2 validation failure, 3 stage failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ExperimentConfig, PRESET_NAMES, preset_config
from .model import ModelConfig, count_params, param_shapes

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_STAGE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexilab",
        description="Train tiny char/BPE decoder LMs and trace word vs. syntax learning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    tok = sub.add_parser("tokenizer", help="tokenizer utilities")
    tok_sub = tok.add_subparsers(dest="subcommand", required=True)
    tok_train = tok_sub.add_parser("train", help="build a tokenizer file")
    tok_train.add_argument("--scheme", choices=("char", "bpe"), required=True)
    tok_train.add_argument("--corpus", type=Path)
    tok_train.add_argument("--vocab-size", type=int, default=8002)
    tok_train.add_argument("--out", type=Path, required=True)
    tok_train.set_defaults(func=cmd_tokenizer_train)

    model = sub.add_parser("model", help="model utilities")
    model_sub = model.add_subparsers(dest="subcommand", required=True)
    info = model_sub.add_parser("info", help="print the parameter census")
    info.add_argument("--config", type=Path, help="ModelConfig JSON file")
    info.add_argument("--preset", choices=PRESET_NAMES)
    info.set_defaults(func=cmd_model_info)

    tr = sub.add_parser("train", help="pretrain a model")
    tr.add_argument("--config", type=Path, help="ModelConfig JSON file")
    tr.add_argument("--preset", choices=PRESET_NAMES)
    tr.add_argument("--tokenizer", type=Path, required=True)
    tr.add_argument("--corpus", type=Path, required=True)
    tr.add_argument("--out", type=Path, required=True)
    tr.add_argument("--steps", type=int, help="default: one pass over the corpus")
    tr.add_argument("--batch-size", type=int, default=32)
    tr.add_argument("--context", type=int, default=128)
    tr.add_argument("--peak-lr", type=float, default=3e-4)
    tr.add_argument("--seed", type=int, default=0)
    tr.set_defaults(func=cmd_train)

    stim = sub.add_parser("stimuli", help="stimulus generation")
    stim_sub = stim.add_subparsers(dest="subcommand", required=True)
    gen = stim_sub.add_parser("generate", help="generate word/non-word pairs")
    gen.add_argument("--lexicon", type=Path, required=True)
    gen.add_argument("--corpus", type=Path, required=True)
    gen.add_argument("--band", choices=("high", "low", "both"), default="high")
    gen.add_argument("--n", type=int, default=1000)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--contexts", type=int, default=10)
    gen.add_argument("--out", type=Path, required=True)
    gen.set_defaults(func=cmd_stimuli_generate)

    ev = sub.add_parser("eval", help="score checkpoints")
    ev.add_argument("--run", type=Path, required=True)
    ev.add_argument("--checkpoints", default="all", help="all | last | step,step,...")
    ev.add_argument("--stimuli", type=Path)
    ev.add_argument("--suite", type=Path, help="minimal-pair suite JSONL")
    ev.add_argument(
        "--protocol",
        choices=("lexdec", "surprisal", "anti", "blimp", "all"),
        default="all",
    )
    ev.add_argument("--tokenizer", type=Path, help="default: <run>/tokenizer.json")
    ev.add_argument("--max-contexts", type=int)
    ev.add_argument("--out", type=Path, required=True)
    ev.set_defaults(func=cmd_eval)

    an = sub.add_parser("analyze", help="curves, correlations, deltas")
    an.add_argument("--results", type=Path, required=True)
    an.add_argument("--blimp", type=Path)
    an.add_argument("--out", type=Path, required=True)
    an.add_argument("--svg", action="store_true")
    an.add_argument("--x-axis", choices=("log-step", "index"), default="log-step")
    an.set_defaults(func=cmd_analyze)

    pipe = sub.add_parser("pipeline", help="end-to-end experiment")
    pipe_sub = pipe.add_subparsers(dest="subcommand", required=True)
    run = pipe_sub.add_parser("run", help="run all stages, skipping fresh ones")
    run.add_argument("--config", type=Path, required=True, help="ExperimentConfig JSON")
    run.set_defaults(func=cmd_pipeline_run)

    val = sub.add_parser("validate", help="check experiment inputs")
    val.add_argument("--config", type=Path, required=True)
    val.set_defaults(func=cmd_validate)

    return parser


def _load_model_config(args) -> ModelConfig:
    if args.preset:
        return preset_config(args.preset)
    if args.config:
        return ModelConfig.from_json(json.loads(args.config.read_text()))
    raise SystemExit("one of --preset or --config is required")


def cmd_tokenizer_train(args) -> int:
    from .tokenizers import build_char_vocab, save_tokenizer, train_bpe

    if args.scheme == "char":
        save_tokenizer(args.out, build_char_vocab())
        print(f"wrote character tokenizer (102 entries) to {args.out}")
        return EXIT_OK
    if not args.corpus:
        print("BPE training requires --corpus", file=sys.stderr)
        return EXIT_VALIDATION
    lines = [l for l in args.corpus.read_text(encoding="utf-8").splitlines() if l]
    vocab, table = train_bpe(lines, args.vocab_size)
    save_tokenizer(args.out, vocab, table)
    note = " (target unreachable, truncated)" if table.truncated else ""
    print(f"wrote BPE tokenizer ({len(vocab)} entries{note}) to {args.out}")
    return EXIT_VALIDATION if table.truncated else EXIT_OK


def cmd_model_info(args) -> int:
    config = _load_model_config(args)
    total = 0
    for name, shape in param_shapes(config).items():
        size = 1
        for dim in shape:
            size *= dim
        total += size
        print(f"{name:24s} {str(shape):16s} {size:>12,d}")
    print(f"{'total':24s} {'':16s} {total:>12,d}")
    assert total == count_params(config)
    return EXIT_OK


def cmd_train(args) -> int:
    from .tokenizers import load_tokenizer
    from .trainer import TrainPlan, train

    config = _load_model_config(args)
    tokenizer = load_tokenizer(args.tokenizer)
    docs = [l for l in args.corpus.read_text(encoding="utf-8").splitlines() if l]
    steps = args.steps
    if steps is None:
        n_tokens = sum(len(tokenizer.encode(d)) + 1 for d in docs)
        steps = max(100, n_tokens // (args.batch_size * args.context))
    plan = TrainPlan(
        total_steps=steps,
        batch_size=args.batch_size,
        context=args.context,
        peak_lr=args.peak_lr,
        seed=args.seed,
    )
    args.out.mkdir(parents=True, exist_ok=True)
    # persist the run inputs next to the checkpoints
    import shutil

    shutil.copyfile(args.tokenizer, args.out / "tokenizer.json")
    (args.out / "train_config.json").write_text(
        json.dumps(
            {"model": config.to_json(), "plan": {k: v for k, v in vars(plan).items()}},
            indent=2,
            sort_keys=True,
        )
    )
    result = train(config, tokenizer, docs, plan, args.out)
    print(
        f"trained {steps} steps; final loss {result.final_loss:.4f}; "
        f"{len(result.checkpoint_dirs)} checkpoints in {args.out}"
    )
    return EXIT_OK


def cmd_stimuli_generate(args) -> int:
    from .stimuli import generate_pairs, load_lexicon, segment_sentences, write_stimuli

    lexicon = load_lexicon(args.lexicon)
    sentences = segment_sentences(args.corpus.read_text(encoding="utf-8"))
    bands = ["high", "low"] if args.band == "both" else [args.band]
    pairs = []
    for band in bands:
        pairs.extend(
            generate_pairs(
                lexicon, band, args.n, sentences,
                seed=args.seed,
                contexts_per_word=args.contexts,
                anti_per_word=args.contexts,
            )
        )
    write_stimuli(args.out, pairs)
    print(f"wrote {len(pairs)} stimulus pairs to {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    from .evaluation import evaluate_run, load_suite, write_results
    from .stimuli import read_stimuli
    from .tokenizers import load_tokenizer

    tok_path = args.tokenizer or (args.run / "tokenizer.json")
    if not tok_path.exists():
        print(f"tokenizer not found at {tok_path}", file=sys.stderr)
        return EXIT_VALIDATION
    tokenizer = load_tokenizer(tok_path)

    pairs = read_stimuli(args.stimuli) if args.stimuli else None
    suite_items = None
    if args.suite:
        suite_items, skipped = load_suite(args.suite)
        if skipped:
            print(f"warning: skipped {skipped} malformed suite records", file=sys.stderr)
    if args.protocol == "all":
        protocols = ("lexdec", "surprisal", "anti")
    elif args.protocol == "blimp":
        protocols = ()
        if suite_items is None:
            print("--protocol blimp requires --suite", file=sys.stderr)
            return EXIT_VALIDATION
    else:
        protocols = (args.protocol,)
    if protocols and pairs is None:
        print(f"--protocol {args.protocol} requires --stimuli", file=sys.stderr)
        return EXIT_VALIDATION

    lexical, syntactic = evaluate_run(
        args.run,
        tokenizer,
        pairs=pairs if protocols else None,
        suite_items=suite_items,
        checkpoints=args.checkpoints,
        protocols=protocols,
        max_contexts=args.max_contexts,
        echo=print,
    )
    write_results(args.out, lexical + syntactic)
    print(f"wrote {len(lexical) + len(syntactic)} records to {args.out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    from .analysis import analyze
    from .evaluation import read_results

    lexical = read_results(args.results)
    blimp = read_results(args.blimp) if args.blimp else []
    outputs = analyze(lexical, blimp, args.out, x_mode=args.x_axis, svg=args.svg)
    for kind, path in outputs.items():
        print(f"{kind}: {path}")
    return EXIT_OK


def cmd_pipeline_run(args) -> int:
    from .pipeline import StageError, run_pipeline

    cfg = ExperimentConfig.load(args.config)
    try:
        run = run_pipeline(cfg, echo=print)
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_STAGE
    print(f"pipeline complete: ran {run.ran or ['nothing']}, skipped {run.skipped}")
    return EXIT_OK


def cmd_validate(args) -> int:
    from .pipeline import validate_inputs

    cfg = ExperimentConfig.load(args.config)
    report = validate_inputs(cfg)
    for key, value in sorted(report["counts"].items()):
        print(f"{key}: {value}")
    for warning in report["warnings"]:
        print(f"warning: {warning}")
    for problem in report["problems"]:
        print(f"problem: {problem}", file=sys.stderr)
    return EXIT_VALIDATION if report["problems"] else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
