"""Experiment configuration: model presets, seed derivation, config files.

The six presets are {small,medium,large} x {char,bpe}.  All share context
128; char presets use the 102-entry character vocabulary and bpe presets
the 8,002-entry subword vocabulary.  Their parameter counts are fixed
integers (486,016 / 3,726,592 / 21,940,736 and 2,508,416 / 7,771,392 /
30,030,336) and the acceptance suite pins them.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .model import ModelConfig
from .tokenizers import CHAR_VOCAB_SIZE

BPE_VOCAB_SIZE = 8002

_PRESET_GEOMETRY = {
    "small": dict(hidden=128, layers=4, heads=4),
    "medium": dict(hidden=256, layers=8, heads=8),
    "large": dict(hidden=512, layers=12, heads=12),
}

PRESET_NAMES = tuple(
    f"{size}-{scheme}" for scheme in ("char", "bpe") for size in ("small", "medium", "large")
)


def preset_config(name: str) -> ModelConfig:
    """Instantiate one of the six named presets, e.g. ``small-char``."""
    try:
        size, scheme = name.split("-")
        geometry = _PRESET_GEOMETRY[size]
    except (ValueError, KeyError):
        raise ValueError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}") from None
    if scheme == "char":
        vocab = CHAR_VOCAB_SIZE
    elif scheme == "bpe":
        vocab = BPE_VOCAB_SIZE
    else:
        raise ValueError(f"unknown tokenization scheme {scheme!r} in preset {name!r}")
    cfg = ModelConfig(vocab_size=vocab, context=128, **geometry)
    cfg.validate()
    return cfg


def derive_seed(root_seed: int, *labels) -> int:
    """Labeled sub-seed so every component draws from its own stream."""
    key = ":".join([str(root_seed), *map(str, labels)])
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def worker_count() -> int:
    """Worker cap from LEXILAB_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("LEXILAB_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class ExperimentConfig:
    """One self-contained experiment: corpus -> tokenizer -> run -> report."""

    corpus: str
    preset: str = "small-char"
    seed: int = 0
    out_root: str = "runs/experiment"
    lexicon: str | None = None
    held_out: str | None = None
    suite: str | None = None  # minimal-pair JSONL for the syntax benchmark
    stimuli: str | None = None  # reuse an existing stimulus file if given
    stimuli_band: str = "high"
    stimuli_n: int = 1000
    contexts_per_word: int = 10
    trainer: dict = field(default_factory=dict)  # TrainPlan field overrides

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, doc: dict) -> "ExperimentConfig":
        return cls(**doc)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json(), indent=2, sort_keys=True), encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
