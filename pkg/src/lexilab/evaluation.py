"""Checkpoint scoring: lexical decision, surprisal, anti-surprisal, and
sentence-level minimal pairs.

All protocols reduce to the same primitive: per-token surprisal (natural
log) of a BOS-conditioned sequence.  Word-level protocols average the
surprisal over the tokens spanning the word (located by character offsets
after encoding prefix+word together); the sentence-level minimal-pair
protocol sums over the whole sequence.  A decision is correct iff the real
word's (or grammatical sentence's) surprisal is strictly lower; exact ties
count as incorrect.

A pair probed in several context sentences is judged by majority over the
per-sentence decisions.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .model import ModelConfig, forward_logits
from .stimuli import AntiContext, StimulusPair
from .tokenizers import Tokenizer

PROTOCOLS = ("lexdec", "surprisal", "anti", "blimp")

RESULTS_HEADER = ["step", "protocol", "band_or_phenomenon", "n", "accuracy", "mean_delta"]


@dataclass
class ProbeResult:
    pair_id: str
    protocol: str
    surprisal_word: float
    surprisal_nonword: float
    fallback: bool = False

    @property
    def correct(self) -> bool:
        return self.surprisal_word < self.surprisal_nonword

    @property
    def delta(self) -> float:
        return self.surprisal_nonword - self.surprisal_word


@dataclass
class PairOutcome:
    """All probes of one stimulus pair under one protocol."""

    pair_id: str
    protocol: str
    probes: list[ProbeResult] = field(default_factory=list)

    @property
    def correct(self) -> bool:
        wins = sum(p.correct for p in self.probes)
        return wins * 2 > len(self.probes)

    @property
    def mean_delta(self) -> float:
        return float(np.mean([p.delta for p in self.probes]))


@dataclass
class EvalRecord:
    step: int
    protocol: str
    band_or_phenomenon: str
    n: int
    accuracy: float
    mean_delta: float


class Scorer:
    """Batched surprisal scoring against a fixed parameter set."""

    def __init__(
        self,
        params: dict[str, np.ndarray],
        config: ModelConfig,
        tokenizer: Tokenizer,
        batch_size: int = 16,
    ):
        self.params = params
        self.config = config
        self.tokenizer = tokenizer
        self.batch_size = batch_size
        self.bos = tokenizer.vocab.bos_id
        self.pad = tokenizer.vocab.eos_pad_id

    def surprisal_arrays(self, id_lists: Sequence[list[int]]) -> list[np.ndarray]:
        """Per-sequence arrays of token surprisals (nats, float64), one value
        per input token, conditioned on BOS + preceding tokens."""
        out: list[np.ndarray | None] = [None] * len(id_lists)
        order = sorted(range(len(id_lists)), key=lambda i: (len(id_lists[i]), i))
        for start in range(0, len(order), self.batch_size):
            group = [i for i in order[start : start + self.batch_size] if id_lists[i]]
            if not group:
                continue
            L = max(len(id_lists[i]) for i in group)
            inputs = np.full((len(group), L), self.pad, dtype=np.int64)
            targets = np.full((len(group), L), 0, dtype=np.int64)
            inputs[:, 0] = self.bos
            for r, i in enumerate(group):
                ids = id_lists[i]
                inputs[r, 1 : len(ids)] = ids[:-1]
                targets[r, : len(ids)] = ids
            logits = forward_logits(self.params, self.config, inputs)
            m = np.max(logits, axis=-1)
            z = np.sum(np.exp(logits - m[..., None]), axis=-1, dtype=np.float64)
            logz = m.astype(np.float64) + np.log(z)
            picked = np.take_along_axis(logits, targets[..., None], axis=-1)[..., 0]
            surprisals = logz - picked.astype(np.float64)
            for r, i in enumerate(group):
                out[i] = surprisals[r, : len(id_lists[i])].copy()
        return [np.empty(0) if a is None else a for a in out]

    def span_means(self, requests: Sequence[tuple[list[int], list[int]]]) -> np.ndarray:
        """Mean surprisal over selected token indices for many sequences."""
        arrays = self.surprisal_arrays([ids for ids, _ in requests])
        return np.array(
            [float(arr[idxs].mean()) for arr, (_, idxs) in zip(arrays, requests)]
        )

    def sequence_totals(self, texts: Sequence[str]) -> np.ndarray:
        """Total sequence surprisal (= -ln P of the whole text)."""
        id_lists = [self._clip(self.tokenizer.encode(t)) for t in texts]
        arrays = self.surprisal_arrays(id_lists)
        return np.array([float(a.sum()) for a in arrays])

    def _clip(self, ids: list[int]) -> list[int]:
        room = self.config.context
        return ids[-room:] if len(ids) > room else ids


def token_surprisals(
    params: dict[str, np.ndarray],
    config: ModelConfig,
    tokenizer: Tokenizer,
    text: str,
) -> np.ndarray:
    """Surprisal (nats) of each token of ``text`` given BOS + its prefix."""
    scorer = Scorer(params, config, tokenizer)
    ids = tokenizer.encode(text)
    if len(ids) > config.context:
        raise ValueError("text is longer than the model context")
    return scorer.surprisal_arrays([ids])[0]


def span_request(
    tokenizer: Tokenizer, prefix: str, word: str, context: int
) -> tuple[list[int], list[int], bool]:
    """Token ids of prefix+word plus the indices of the tokens spanning the
    word (character-offset overlap).  Falls back to encoding prefix and word
    separately if no token overlaps the word region (flagged)."""
    if not word:
        raise ValueError("word must be non-empty")
    full = prefix + word
    ids = tokenizer.encode(full)
    spans = tokenizer.spans(ids)
    lo, hi = len(prefix), len(full)
    idxs = [i for i, (s, e) in enumerate(spans) if s < hi and e > lo]
    fallback = False
    if not idxs:
        head = tokenizer.encode(prefix)
        tail = tokenizer.encode(word)
        ids = head + tail
        idxs = list(range(len(head), len(ids)))
        fallback = True
    if len(ids) > context:
        cut = len(ids) - context
        ids = ids[cut:]
        idxs = [i - cut for i in idxs]
        if idxs and idxs[0] < 0:
            raise ValueError("word span does not fit inside the model context")
    return ids, idxs, fallback


def word_span_surprisal(
    params: dict[str, np.ndarray],
    config: ModelConfig,
    tokenizer: Tokenizer,
    prefix: str,
    word: str,
) -> tuple[float, bool]:
    """Mean surprisal over exactly the tokens spanning ``word`` when
    ``prefix + word`` is encoded."""
    scorer = Scorer(params, config, tokenizer)
    ids, idxs, fallback = span_request(tokenizer, prefix, word, config.context)
    return float(scorer.span_means([(ids, idxs)])[0]), fallback


LEXDEC_PREFIX = " "  # the most neutral context: a single whitespace


def _word_char_offset(sentence: str, word: str) -> int:
    """Char offset of the first non-initial whitespace-delimited occurrence."""
    for m in re.finditer(r"\S+", sentence):
        if m.group() == word and m.start() > 0:
            return m.start()
    raise ValueError(f"{word!r} does not occur (non-initially) in {sentence!r}")


def lexical_decision(scorer: Scorer, pair: StimulusPair) -> ProbeResult:
    outcomes = score_pairs(scorer, [pair], "lexdec")
    return outcomes[0].probes[0]


def surprisal_decision(
    scorer: Scorer, pair: StimulusPair, context_sentence: str
) -> ProbeResult:
    offset = _word_char_offset(context_sentence, pair.word)
    prefix = context_sentence[:offset]
    return _probe(scorer, pair, "surprisal", prefix)


def anti_surprisal_decision(
    scorer: Scorer, pair: StimulusPair, anti: AntiContext
) -> ProbeResult:
    tokens = anti.sentence.split()
    if not 3 <= anti.index <= len(tokens):
        raise ValueError(f"insertion index {anti.index} out of range")
    prefix = " ".join(tokens[: anti.index]) + " "
    return _probe(scorer, pair, "anti", prefix)


def _probe(scorer: Scorer, pair: StimulusPair, protocol: str, prefix: str) -> ProbeResult:
    ctx = scorer.config.context
    req_w = span_request(scorer.tokenizer, prefix, pair.word, ctx)
    req_n = span_request(scorer.tokenizer, prefix, pair.nonword, ctx)
    means = scorer.span_means([req_w[:2], req_n[:2]])
    return ProbeResult(
        pair_id=pair.word,
        protocol=protocol,
        surprisal_word=means[0],
        surprisal_nonword=means[1],
        fallback=req_w[2] or req_n[2],
    )


def score_pairs(
    scorer: Scorer,
    pairs: Sequence[StimulusPair],
    protocol: str,
    max_contexts: int | None = None,
) -> list[PairOutcome]:
    """Score every pair under one protocol with batched forward passes.
    Pairs with no usable context under a contextual protocol are dropped."""
    ctx = scorer.config.context
    requests: list[tuple[list[int], list[int]]] = []
    fallbacks: list[bool] = []
    layout: list[tuple[int, int]] = []  # (pair index, probes for that pair)

    def add(prefix: str, pair: StimulusPair) -> None:
        rw = span_request(scorer.tokenizer, prefix, pair.word, ctx)
        rn = span_request(scorer.tokenizer, prefix, pair.nonword, ctx)
        requests.append(rw[:2])
        requests.append(rn[:2])
        fallbacks.append(rw[2] or rn[2])

    for pi, pair in enumerate(pairs):
        if protocol == "lexdec":
            add(LEXDEC_PREFIX, pair)
            layout.append((pi, 1))
        elif protocol == "surprisal":
            contexts = pair.contexts[:max_contexts] if max_contexts else pair.contexts
            count = 0
            for sentence in contexts:
                try:
                    offset = _word_char_offset(sentence, pair.word)
                except ValueError:
                    continue
                add(sentence[:offset], pair)
                count += 1
            layout.append((pi, count))
        elif protocol == "anti":
            antis = pair.anti_contexts[:max_contexts] if max_contexts else pair.anti_contexts
            for anti in antis:
                tokens = anti.sentence.split()
                add(" ".join(tokens[: anti.index]) + " ", pair)
            layout.append((pi, len(antis)))
        else:
            raise ValueError(f"unknown pair protocol {protocol!r}")

    means = scorer.span_means(requests)
    outcomes: list[PairOutcome] = []
    cursor = 0
    for pi, count in layout:
        pair = pairs[pi]
        if count == 0:
            continue
        probes = []
        for j in range(count):
            probes.append(
                ProbeResult(
                    pair_id=pair.word,
                    protocol=protocol,
                    surprisal_word=float(means[cursor + 2 * j]),
                    surprisal_nonword=float(means[cursor + 2 * j + 1]),
                    fallback=fallbacks[cursor // 2 + j],
                )
            )
        cursor += 2 * count
        outcomes.append(PairOutcome(pair_id=pair.word, protocol=protocol, probes=probes))
    return outcomes


def summarize(
    outcomes: Sequence[PairOutcome], step: int, protocol: str, band: str
) -> EvalRecord:
    n = len(outcomes)
    accuracy = sum(o.correct for o in outcomes) / n if n else float("nan")
    deltas = [p.delta for o in outcomes for p in o.probes]
    mean_delta = float(np.mean(deltas)) if deltas else float("nan")
    return EvalRecord(step, protocol, band, n, accuracy, mean_delta)


@dataclass
class SuiteItem:
    sentence_good: str
    sentence_bad: str
    phenomenon: str


def load_suite(path: str | Path) -> tuple[list[SuiteItem], int]:
    """Minimal-pair suite JSONL: {sentence_good, sentence_bad, phenomenon}.
    Returns (items, number of malformed records skipped)."""
    items: list[SuiteItem] = []
    skipped = 0
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            good, bad = doc["sentence_good"], doc["sentence_bad"]
            phenomenon = doc["phenomenon"]
            if not all(isinstance(v, str) for v in (good, bad, phenomenon)):
                raise TypeError("suite fields must be strings")
            items.append(SuiteItem(good, bad, phenomenon))
        except (json.JSONDecodeError, KeyError, TypeError):
            skipped += 1
    return items, skipped


def minimal_pair_accuracy(
    scorer: Scorer, items: Sequence[SuiteItem]
) -> tuple[dict[str, tuple[int, float, float]], float]:
    """Per-phenomenon (n, accuracy, mean surprisal delta) and the unweighted
    mean accuracy over phenomena.  A pair is correct iff the grammatical
    sentence's total surprisal is strictly lower."""
    texts: list[str] = []
    for item in items:
        texts.append(item.sentence_good)
        texts.append(item.sentence_bad)
    totals = scorer.sequence_totals(texts)
    by_phenomenon: dict[str, list[tuple[bool, float]]] = {}
    for i, item in enumerate(items):
        good, bad = totals[2 * i], totals[2 * i + 1]
        by_phenomenon.setdefault(item.phenomenon, []).append(
            (good < bad, float(bad - good))
        )
    table: dict[str, tuple[int, float, float]] = {}
    for phen in sorted(by_phenomenon):
        rows = by_phenomenon[phen]
        acc = sum(c for c, _ in rows) / len(rows)
        table[phen] = (len(rows), acc, float(np.mean([d for _, d in rows])))
    overall = float(np.mean([acc for _, acc, _ in table.values()])) if table else float("nan")
    return table, overall


def list_checkpoints(run_dir: str | Path) -> list[tuple[int, Path]]:
    """(step, directory) for every checkpoint under a training run."""
    out = []
    for ck in sorted(Path(run_dir).glob("checkpoint-*")):
        manifest = ck / "manifest.json"
        if manifest.exists():
            out.append((json.loads(manifest.read_text())["step"], ck))
    return sorted(out)


def select_checkpoints(
    run_dir: str | Path, which: str = "all"
) -> list[tuple[int, Path]]:
    """``which``: 'all', 'last', or a comma-separated list of steps."""
    available = list_checkpoints(run_dir)
    if not available:
        raise FileNotFoundError(f"no checkpoints under {run_dir}")
    if which == "all":
        return available
    if which == "last":
        return available[-1:]
    wanted = {int(s) for s in which.split(",")}
    chosen = [(step, path) for step, path in available if step in wanted]
    missing = wanted - {s for s, _ in chosen}
    if missing:
        raise ValueError(f"checkpoints not found for steps {sorted(missing)}")
    return chosen


def evaluate_pair_protocols(
    scorer: Scorer,
    pairs: Sequence[StimulusPair],
    step: int,
    protocols: Sequence[str] = ("lexdec", "surprisal", "anti"),
    max_contexts: int | None = None,
) -> list[EvalRecord]:
    """One EvalRecord per (protocol, band) at one checkpoint."""
    records = []
    bands = sorted({p.band for p in pairs})
    for protocol in protocols:
        for band in bands:
            members = [p for p in pairs if p.band == band]
            outcomes = score_pairs(scorer, members, protocol, max_contexts=max_contexts)
            if outcomes:
                records.append(summarize(outcomes, step, protocol, band))
    return records


def evaluate_run(
    run_dir: str | Path,
    tokenizer: Tokenizer,
    pairs: Sequence[StimulusPair] | None = None,
    suite_items: Sequence[SuiteItem] | None = None,
    checkpoints: str = "all",
    protocols: Sequence[str] = ("lexdec", "surprisal", "anti"),
    max_contexts: int | None = None,
    batch_size: int = 16,
    echo=None,
) -> tuple[list[EvalRecord], list[EvalRecord]]:
    """Score selected checkpoints of a run.  Returns (lexical records,
    minimal-pair suite records)."""
    from .model import load_checkpoint

    lexical: list[EvalRecord] = []
    syntactic: list[EvalRecord] = []
    for step, ck_dir in select_checkpoints(run_dir, checkpoints):
        _, config, params, _ = load_checkpoint(ck_dir)
        scorer = Scorer(params, config, tokenizer, batch_size=batch_size)
        if pairs:
            lexical.extend(
                evaluate_pair_protocols(scorer, pairs, step, protocols, max_contexts)
            )
        if suite_items:
            table, _ = minimal_pair_accuracy(scorer, suite_items)
            for phenomenon, (n, acc, delta) in table.items():
                syntactic.append(
                    EvalRecord(step, "blimp", phenomenon, n, acc, delta)
                )
        if echo:
            echo(f"evaluated checkpoint {step}")
    return lexical, syntactic


def write_results(path: str | Path, records: Iterable[EvalRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for r in records:
            writer.writerow(
                [r.step, r.protocol, r.band_or_phenomenon, r.n,
                 f"{r.accuracy:.6f}", f"{r.mean_delta:.6f}"]
            )


def read_results(path: str | Path) -> list[EvalRecord]:
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(
                EvalRecord(
                    step=int(row["step"]),
                    protocol=row["protocol"],
                    band_or_phenomenon=row["band_or_phenomenon"],
                    n=int(row["n"]),
                    accuracy=float(row["accuracy"]),
                    mean_delta=float(row["mean_delta"]),
                )
            )
    return records
