#!/usr/bin/env python3
"""Generate the self-contained demo corpus, held-out split, and lexicon.

Usage:
  python scripts/make_corpus.py --out data/ --words 2050000 --seed 0
"""

import argparse
from pathlib import Path

from lexilab.demo import build_demo_data


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--words", type=int, default=2_050_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--held-out-fraction", type=float, default=0.02)
    args = parser.parse_args()
    data = build_demo_data(
        args.out, n_words=args.words, seed=args.seed,
        held_out_fraction=args.held_out_fraction,
    )
    print(f"corpus:   {data.corpus_path} ({data.n_words} words, {data.n_sentences} sentences)")
    print(f"held-out: {data.held_out_path}")
    print(f"lexicon:  {data.lexicon_path}")


if __name__ == "__main__":
    main()
