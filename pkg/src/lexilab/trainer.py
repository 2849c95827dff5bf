"""Pretraining loop with the 19-point logarithmic checkpoint grid.

Optimizer defaults are standard small-LM practice: AdamW with betas
0.9/0.95, weight decay 0.1 on matrices, linear warmup over 1% of steps,
cosine decay to zero, peak learning rate 3e-4, batches of 32 sequences of
128 tokens.  All of it is overridable through :class:`TrainPlan`.

Documents are shuffled per epoch with the run seed and packed into a flat
token stream with EOS/PAD separators; training windows of ``context + 1``
tokens are cut from the stream with stride ``context``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import derive_seed
from .model import (
    ModelConfig,
    init_params,
    loss_and_grads,
    save_checkpoint,
    token_cross_entropy,
)
from .tokenizers import Tokenizer

LOSS_LOG_FILENAME = "loss_log.csv"


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def checkpoint_schedule(total_steps: int) -> list[int]:
    """19 checkpoint steps: 10 log-spaced over the first tenth of training
    (from total/100 to total/10), then one every further tenth.  Duplicates
    (possible only for small totals) are dropped.
    """
    if total_steps < 100:
        raise ValueError("checkpoint schedule needs total_steps >= 100")
    early = [
        max(1, _round_half_up(0.1 * total_steps * 10.0 ** ((i - 9) / 9.0)))
        for i in range(10)
    ]
    # rounding may push the tenth point just past total/10; clamp it
    early[9] = min(early[9], total_steps // 10)
    late = [_round_half_up(total_steps * (0.1 + 0.1 * j)) for j in range(1, 10)]
    return sorted(set(early + late))


@dataclass
class TrainPlan:
    total_steps: int
    batch_size: int = 32
    context: int = 128
    peak_lr: float = 3e-4
    warmup_frac: float = 0.01
    weight_decay: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.95
    adam_eps: float = 1e-8
    seed: int = 0
    log_every: int = 10
    cycle_corpus: bool = True
    checkpoint_steps: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.checkpoint_steps:
            self.checkpoint_steps = checkpoint_schedule(self.total_steps)
        if self.checkpoint_steps != sorted(set(self.checkpoint_steps)):
            raise ValueError("checkpoint_steps must be strictly increasing")
        if self.checkpoint_steps[-1] != self.total_steps:
            raise ValueError("last checkpoint must equal total_steps")

    def with_overrides(self, **overrides) -> "TrainPlan":
        plan = replace(self, **overrides)
        if "total_steps" in overrides and "checkpoint_steps" not in overrides:
            plan.checkpoint_steps = checkpoint_schedule(plan.total_steps)
        return plan


def learning_rate_at(step: int, plan: TrainPlan) -> float:
    warmup = max(1, _round_half_up(plan.warmup_frac * plan.total_steps))
    if step <= warmup:
        return plan.peak_lr * step / warmup
    progress = (step - warmup) / max(1, plan.total_steps - warmup)
    return plan.peak_lr * 0.5 * (1.0 + math.cos(math.pi * progress))


class AdamW:
    """Decoupled weight decay on matrices; norm scale vectors undecayed."""

    def __init__(self, params: dict[str, np.ndarray], plan: TrainPlan):
        self.plan = plan
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray], lr: float) -> None:
        self.t += 1
        p = self.plan
        bc1 = 1.0 - p.beta1**self.t
        bc2 = 1.0 - p.beta2**self.t
        for name, theta in params.items():
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= p.beta1
            m += (1.0 - p.beta1) * g
            v *= p.beta2
            v += (1.0 - p.beta2) * np.square(g)
            update = (m / bc1) / (np.sqrt(v / bc2) + p.adam_eps)
            if theta.ndim >= 2:
                update = update + p.weight_decay * theta
            theta -= np.asarray(lr * update, dtype=theta.dtype)


def pack_documents(
    docs: Sequence[str], tokenizer: Tokenizer, order: np.ndarray | None = None
) -> np.ndarray:
    """Encode documents (optionally reordered) into one flat id stream with
    an EOS/PAD separator after each document."""
    eos = tokenizer.vocab.eos_pad_id
    ids: list[int] = []
    indices = range(len(docs)) if order is None else order
    for i in indices:
        doc = docs[i]
        if not doc:
            continue
        ids.extend(tokenizer.encode(doc))
        ids.append(eos)
    return np.asarray(ids, dtype=np.int64)


class _WindowFeed:
    """Yields training windows of context+1 tokens, re-packing the shuffled
    corpus whenever a pass completes."""

    def __init__(self, docs: Sequence[str], tokenizer: Tokenizer, plan: TrainPlan):
        self.docs = docs
        self.tokenizer = tokenizer
        self.plan = plan
        self.epoch = 0
        self._windows: np.ndarray | None = None
        self._next = 0

    def _repack(self) -> None:
        rng = np.random.default_rng(derive_seed(self.plan.seed, "data-order", self.epoch))
        order = rng.permutation(len(self.docs))
        stream = pack_documents(self.docs, self.tokenizer, order)
        C = self.plan.context
        n_windows = (len(stream) - 1) // C
        if n_windows < 1:
            raise ValueError("corpus too small for even one training window")
        self._windows = np.stack(
            [stream[k * C : k * C + C + 1] for k in range(n_windows)]
        )
        self._next = 0
        self.epoch += 1

    def next_batch(self) -> np.ndarray:
        rows = []
        need = self.plan.batch_size
        while need > 0:
            if self._windows is None or self._next >= len(self._windows):
                if self.epoch > 0 and not self.plan.cycle_corpus:
                    raise ValueError(
                        "corpus exhausted and cycling is disabled; "
                        "reduce total_steps or enable cycle_corpus"
                    )
                self._repack()
            take = min(need, len(self._windows) - self._next)
            rows.append(self._windows[self._next : self._next + take])
            self._next += take
            need -= take
        return np.concatenate(rows, axis=0)


@dataclass
class TrainResult:
    checkpoint_dirs: dict[int, Path]
    loss_log: list[tuple[int, float]]
    final_loss: float


def checkpoint_dir_name(step: int) -> str:
    return f"checkpoint-{step:08d}"


def train(
    config: ModelConfig,
    tokenizer: Tokenizer,
    docs: Sequence[str],
    plan: TrainPlan,
    out_dir: str | Path,
) -> TrainResult:
    """Run the full plan, saving a checkpoint at every scheduled step and a
    ``loss_log.csv`` of (step, train-loss) rows."""
    if config.vocab_size != len(tokenizer):
        raise ValueError(
            f"model vocab {config.vocab_size} != tokenizer vocab {len(tokenizer)}"
        )
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pad_id = tokenizer.vocab.eos_pad_id
    plan = plan.with_overrides(context=min(plan.context, config.context))

    params = init_params(config, derive_seed(plan.seed, "init"))
    optimizer = AdamW(params, plan)
    feed = _WindowFeed(docs, tokenizer, plan)
    schedule = set(plan.checkpoint_steps)

    loss_log: list[tuple[int, float]] = []
    checkpoint_dirs: dict[int, Path] = {}
    loss = float("nan")
    for step in range(1, plan.total_steps + 1):
        batch = feed.next_batch()
        loss, grads = loss_and_grads(params, config, batch, pad_id=pad_id)
        if not math.isfinite(loss):
            raise RuntimeError(f"non-finite training loss at step {step}")
        optimizer.step(params, grads, learning_rate_at(step, plan))
        if step == 1 or step == plan.total_steps or step % plan.log_every == 0:
            loss_log.append((step, loss))
        if step in schedule:
            ck_dir = out_dir / checkpoint_dir_name(step)
            save_checkpoint(ck_dir, step, config, params, loss)
            checkpoint_dirs[step] = ck_dir

    with open(out_dir / LOSS_LOG_FILENAME, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "loss"])
        for step, value in loss_log:
            writer.writerow([step, f"{value:.6f}"])
    return TrainResult(checkpoint_dirs=checkpoint_dirs, loss_log=loss_log, final_loss=loss)


def perplexity(
    params: dict[str, np.ndarray],
    config: ModelConfig,
    tokenizer: Tokenizer,
    docs: Sequence[str],
    batch_size: int = 32,
) -> float:
    """exp(mean token cross-entropy) over a held-out stream.

    The stream is chunked at the model context; each chunk is scored with a
    prepended BOS so every held-out token contributes exactly once.
    """
    stream = pack_documents(docs, tokenizer)
    if stream.size == 0:
        raise ValueError("held-out stream is empty")
    C = config.context
    bos, pad = tokenizer.vocab.bos_id, tokenizer.vocab.eos_pad_id
    chunks = [stream[i : i + C] for i in range(0, len(stream), C)]
    total_nll = 0.0
    total_tokens = 0
    for start in range(0, len(chunks), batch_size):
        group = chunks[start : start + batch_size]
        width = max(len(c) for c in group)
        rows = np.full((len(group), width + 1), pad, dtype=np.int64)
        mask = np.zeros((len(group), width), dtype=bool)
        rows[:, 0] = bos
        for r, chunk in enumerate(group):
            rows[r, 1 : 1 + len(chunk)] = chunk
            mask[r, : len(chunk)] = True
        nll, n = token_cross_entropy(params, config, rows, pad_id=pad, target_mask=mask)
        total_nll += nll
        total_tokens += n
    return float(np.exp(total_nll / total_tokens))
