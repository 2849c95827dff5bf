#!/usr/bin/env python3
"""Character vs. subword word-learning experiment, end to end.

Trains one char-tokenized and one BPE-tokenized model of the same size on
the same corpus with the same seed, evaluates lexical decision, in-context
surprisal, and anti-surprisal across all 19 checkpoints, and writes learning
curves plus a char-vs-bpe summary table.

With no --corpus, a 2.05M-word demo corpus is generated first (see
scripts/make_corpus.py).  Expect roughly an hour on one CPU core for the
small presets.

Usage:
  python scripts/run_word_vs_syntax.py --out runs/exp1 [--size small]
      [--corpus data/corpus.txt --lexicon data/lexicon.tsv] [--seed 0]
      [--suite suite.jsonl] [--bands both] [--n-pairs 1000]
"""

import argparse
import sys
from pathlib import Path

from lexilab.config import ExperimentConfig
from lexilab.demo import build_demo_data
from lexilab.evaluation import read_results
from lexilab.pipeline import StageError, run_pipeline


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--size", choices=("small", "medium", "large"), default="small")
    parser.add_argument("--corpus", type=Path)
    parser.add_argument("--lexicon", type=Path)
    parser.add_argument("--suite", type=Path)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--bands", choices=("high", "low", "both"), default="both")
    parser.add_argument("--n-pairs", type=int, default=1000)
    parser.add_argument("--contexts", type=int, default=5)
    parser.add_argument("--demo-words", type=int, default=2_050_000)
    args = parser.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    corpus, lexicon = args.corpus, args.lexicon
    if corpus is None:
        data = build_demo_data(args.out / "data", n_words=args.demo_words, seed=args.seed)
        corpus, lexicon = data.corpus_path, data.lexicon_path
        print(f"demo corpus: {data.n_words} words")
    if lexicon is None:
        parser.error("--lexicon is required when --corpus is given")

    runs = {}
    for scheme in ("char", "bpe"):
        cfg = ExperimentConfig(
            corpus=str(corpus),
            lexicon=str(lexicon),
            preset=f"{args.size}-{scheme}",
            seed=args.seed,
            out_root=str(args.out / scheme),
            suite=str(args.suite) if args.suite else None,
            stimuli_band=args.bands,
            stimuli_n=args.n_pairs,
            contexts_per_word=args.contexts,
        )
        print(f"=== {cfg.preset} ===")
        try:
            runs[scheme] = run_pipeline(cfg, echo=print)
        except StageError as exc:
            print(exc, file=sys.stderr)
            return 3

    print()
    print(f"{'protocol':12s} {'band':6s} {'char':>8s} {'bpe':>8s} {'gap':>8s}")
    final = {}
    for scheme, run in runs.items():
        records = read_results(run.results_path)
        last = max(r.step for r in records)
        for r in records:
            if r.step == last:
                final[(scheme, r.protocol, r.band_or_phenomenon)] = r.accuracy
    for protocol in ("lexdec", "surprisal", "anti"):
        for band in ("high", "low"):
            c = final.get(("char", protocol, band))
            b = final.get(("bpe", protocol, band))
            if c is None or b is None:
                continue
            print(f"{protocol:12s} {band:6s} {100*c:8.1f} {100*b:8.1f} {100*(c-b):+8.1f}")
    print(f"\nreports: {runs['char'].report_dir} and {runs['bpe'].report_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
