"""Character and byte-pair-encoding tokenizers.

Two schemes share one Vocab/wire format:

* ``char`` -- a fixed 102-entry vocabulary: the 100 printable ASCII symbols
  (95 graphic characters plus tab/newline/vertical-tab/form-feed/carriage
  return) and two specials, BOS and a combined EOS/PAD.
* ``bpe`` -- an alphabet seeded with the same printable set plus greedy
  most-frequent-pair merges learned from a corpus, again with the two
  specials.

Pre-tokenization for BPE splits text into units matching `` ?\\S+|\\s``: a
word optionally absorbs one preceding space (so word-initial subwords are
distinguishable), and any other whitespace survives as a single-character
unit.  Merges never cross unit boundaries, which makes decode a plain
concatenation and the round trip exact on any printable text.
"""

from __future__ import annotations

import heapq
import json
import re
import string
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

BOS_TOKEN = "<s>"
EOS_PAD_TOKEN = "</s>"

# 100 symbols: string.printable is exactly the 95 graphic ASCII characters
# plus ' \t\n\r\x0b\x0c'.  Sorted by codepoint for a stable id assignment.
PRINTABLE_CHARS: tuple[str, ...] = tuple(sorted(string.printable))

CHAR_VOCAB_SIZE = len(PRINTABLE_CHARS) + 2  # 102

_UNIT_RE = re.compile(r" ?\S+|\s")


class TokenizationError(ValueError):
    """Raised for out-of-vocabulary characters or unknown token ids."""


@dataclass
class Vocab:
    """Bidirectional token-string <-> id mapping for one scheme."""

    scheme: str  # "char" | "bpe"
    tokens: list[str]  # id -> token string
    bos_id: int = 0
    eos_pad_id: int = 1
    id_of: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.id_of = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self.id_of) != len(self.tokens):
            raise ValueError("duplicate token strings in vocabulary")
        if self.bos_id == self.eos_pad_id:
            raise ValueError("BOS and EOS/PAD must be distinct ids")

    def __len__(self) -> int:
        return len(self.tokens)

    def token_of(self, token_id: int) -> str:
        if not 0 <= token_id < len(self.tokens):
            raise TokenizationError(f"unknown token id {token_id}")
        return self.tokens[token_id]


@dataclass
class MergeTable:
    """Ordered BPE merge rules plus the initial alphabet."""

    merges: list[tuple[str, str]]
    alphabet: list[str]
    truncated: bool = False  # target vocab size was unreachable

    def ranks(self) -> dict[tuple[str, str], int]:
        return {pair: i for i, pair in enumerate(self.merges)}


def build_char_vocab() -> Vocab:
    """The fixed 102-entry character vocabulary."""
    tokens = [BOS_TOKEN, EOS_PAD_TOKEN, *PRINTABLE_CHARS]
    return Vocab(scheme="char", tokens=tokens)


def pretokenize(text: str) -> list[str]:
    """Split text into BPE merge units; concatenation restores the text."""
    return _UNIT_RE.findall(text)


def train_bpe(
    corpus: Iterable[str],
    target_vocab: int,
    seed_alphabet: Iterable[str] = PRINTABLE_CHARS,
) -> tuple[Vocab, MergeTable]:
    """Learn greedy most-frequent-pair merges until the vocabulary reaches
    ``target_vocab`` entries (alphabet + merges + 2 specials).

    Ties between equally frequent pairs break lexicographically on the
    (left, right) token strings, so training is deterministic for a given
    corpus.  Merging stops early, with ``MergeTable.truncated`` set, once no
    pair occurs at least twice.
    """
    unit_counts: Counter[str] = Counter()
    for line in corpus:
        unit_counts.update(pretokenize(line))
    if not unit_counts:
        raise ValueError("cannot train BPE on an empty corpus")

    alphabet = set(seed_alphabet)
    for unit in unit_counts:
        alphabet.update(unit)
    alphabet_list = sorted(alphabet)
    if target_vocab <= len(alphabet_list) + 2:
        raise ValueError(
            f"target_vocab {target_vocab} must exceed alphabet "
            f"({len(alphabet_list)}) + 2 specials"
        )

    units: list[list[str]] = []
    counts: list[int] = []
    pair_counts: Counter[tuple[str, str]] = Counter()
    pair_units: dict[tuple[str, str], set[int]] = {}
    for unit, cnt in sorted(unit_counts.items()):
        idx = len(units)
        symbols = list(unit)
        units.append(symbols)
        counts.append(cnt)
        for pair in zip(symbols, symbols[1:]):
            pair_counts[pair] += cnt
            pair_units.setdefault(pair, set()).add(idx)

    heap: list[tuple[int, str, str]] = [
        (-c, left, right) for (left, right), c in pair_counts.items()
    ]
    heapq.heapify(heap)

    merges: list[tuple[str, str]] = []
    n_merges_needed = target_vocab - len(alphabet_list) - 2
    truncated = False

    while len(merges) < n_merges_needed:
        best = None
        while heap:
            neg, left, right = heapq.heappop(heap)
            if pair_counts.get((left, right), 0) == -neg:
                best = (left, right)
                break
        if best is None or pair_counts[best] < 2:
            truncated = True
            break

        merged = best[0] + best[1]
        merges.append(best)
        touched: set[tuple[str, str]] = set()
        for idx in sorted(pair_units.get(best, ())):
            symbols = units[idx]
            cnt = counts[idx]
            old_pairs = set(zip(symbols, symbols[1:]))
            for pair in zip(symbols, symbols[1:]):
                pair_counts[pair] -= cnt
            new_symbols: list[str] = []
            i = 0
            while i < len(symbols):
                if (
                    i + 1 < len(symbols)
                    and symbols[i] == best[0]
                    and symbols[i + 1] == best[1]
                ):
                    new_symbols.append(merged)
                    i += 2
                else:
                    new_symbols.append(symbols[i])
                    i += 1
            units[idx] = new_symbols
            new_pairs = set(zip(new_symbols, new_symbols[1:]))
            for pair in zip(new_symbols, new_symbols[1:]):
                pair_counts[pair] += cnt
            for pair in old_pairs - new_pairs:
                pair_units[pair].discard(idx)
            for pair in new_pairs - old_pairs:
                pair_units.setdefault(pair, set()).add(idx)
            touched.update(old_pairs ^ new_pairs)
            touched.update(new_pairs)
        pair_counts.pop(best, None)
        pair_units.pop(best, None)
        for pair in touched:
            c = pair_counts.get(pair, 0)
            if c > 0:
                heapq.heappush(heap, (-c, pair[0], pair[1]))

    tokens = [BOS_TOKEN, EOS_PAD_TOKEN, *alphabet_list]
    tokens.extend(left + right for left, right in merges)
    vocab = Vocab(scheme="bpe", tokens=tokens)
    table = MergeTable(merges=merges, alphabet=alphabet_list, truncated=truncated)
    return vocab, table


def _apply_merges(
    symbols: list[str], ranks: dict[tuple[str, str], int]
) -> list[str]:
    """Apply merge rules in training order (lowest rank first)."""
    while len(symbols) > 1:
        best_rank = None
        best_at = -1
        for i in range(len(symbols) - 1):
            rank = ranks.get((symbols[i], symbols[i + 1]))
            if rank is not None and (best_rank is None or rank < best_rank):
                best_rank = rank
                best_at = i
        if best_rank is None:
            break
        left, right = symbols[best_at], symbols[best_at + 1]
        merged = left + right
        out: list[str] = []
        i = 0
        while i < len(symbols):
            if i + 1 < len(symbols) and symbols[i] == left and symbols[i + 1] == right:
                out.append(merged)
                i += 2
            else:
                out.append(symbols[i])
                i += 1
        symbols = out
    return symbols


def encode(
    vocab: Vocab,
    text: str,
    merges: MergeTable | None = None,
    _unit_cache: dict[str, list[int]] | None = None,
) -> list[int]:
    """Text -> token ids.  Never emits BOS or EOS/PAD.

    Character scheme: one id per character; unknown characters raise with
    the offending character and offset.  BPE scheme: pre-tokenize, apply
    merges in training order, then map symbols to ids.
    """
    if vocab.scheme == "char":
        ids = []
        id_of = vocab.id_of
        for offset, ch in enumerate(text):
            try:
                ids.append(id_of[ch])
            except KeyError:
                raise TokenizationError(
                    f"character {ch!r} at offset {offset} is not in the "
                    "character vocabulary"
                ) from None
        return ids

    if merges is None:
        raise ValueError("BPE encoding requires a MergeTable")
    ranks = getattr(merges, "_rank_cache", None)
    if ranks is None:
        ranks = merges.ranks()
    ids: list[int] = []
    pos = 0  # units tile the text, so each unit starts at pos
    for unit in pretokenize(text):
        if _unit_cache is not None and unit in _unit_cache:
            ids.extend(_unit_cache[unit])
            pos += len(unit)
            continue
        symbols = _apply_merges(list(unit), ranks)
        unit_ids = []
        char_off = pos
        for sym in symbols:
            sym_id = vocab.id_of.get(sym)
            if sym_id is None:
                raise TokenizationError(
                    f"character {sym[0]!r} at offset {char_off} is not in the "
                    "BPE alphabet"
                )
            unit_ids.append(sym_id)
            char_off += len(sym)
        if _unit_cache is not None:
            _unit_cache[unit] = unit_ids
        ids.extend(unit_ids)
        pos += len(unit)
    return ids


def decode(vocab: Vocab, ids: Iterable[int]) -> str:
    """Token ids -> text.  BOS/EOS-PAD ids decode to the empty string."""
    parts = []
    for token_id in ids:
        if token_id in (vocab.bos_id, vocab.eos_pad_id):
            continue
        parts.append(vocab.token_of(token_id))
    return "".join(parts)


def token_spans(vocab: Vocab, ids: list[int]) -> list[tuple[int, int]]:
    """Character [start, end) span of each token in the decoded text."""
    spans = []
    pos = 0
    for token_id in ids:
        if token_id in (vocab.bos_id, vocab.eos_pad_id):
            spans.append((pos, pos))
            continue
        tok = vocab.token_of(token_id)
        spans.append((pos, pos + len(tok)))
        pos += len(tok)
    return spans


class Tokenizer:
    """Vocab + merges bundled with an encode cache for corpus-scale use."""

    def __init__(self, vocab: Vocab, merges: MergeTable | None = None):
        if vocab.scheme == "bpe" and merges is None:
            raise ValueError("BPE tokenizer needs a MergeTable")
        self.vocab = vocab
        self.merges = merges
        self._cache: dict[str, list[int]] = {}
        if merges is not None:
            merges._rank_cache = merges.ranks()  # type: ignore[attr-defined]

    @property
    def scheme(self) -> str:
        return self.vocab.scheme

    def __len__(self) -> int:
        return len(self.vocab)

    def encode(self, text: str) -> list[int]:
        if self.vocab.scheme == "char":
            return encode(self.vocab, text)
        return encode(self.vocab, text, self.merges, _unit_cache=self._cache)

    def decode(self, ids: Iterable[int]) -> str:
        return decode(self.vocab, ids)

    def spans(self, ids: list[int]) -> list[tuple[int, int]]:
        return token_spans(self.vocab, ids)


def save_tokenizer(path: str | Path, vocab: Vocab, merges: MergeTable | None = None) -> None:
    doc = {
        "scheme": vocab.scheme,
        "tokens": vocab.tokens,
        "merges": [list(pair) for pair in merges.merges] if merges else [],
        "bos": BOS_TOKEN,
        "eos_pad": EOS_PAD_TOKEN,
    }
    Path(path).write_text(json.dumps(doc, ensure_ascii=False), encoding="utf-8")


def load_tokenizer(path: str | Path) -> Tokenizer:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    vocab = Vocab(scheme=doc["scheme"], tokens=list(doc["tokens"]))
    merges = None
    if doc["scheme"] == "bpe":
        merge_list = [tuple(pair) for pair in doc["merges"]]
        n_merged = len(merge_list)
        alphabet = [t for t in doc["tokens"][2 : len(doc["tokens"]) - n_merged]]
        merges = MergeTable(merges=merge_list, alphabet=alphabet)
    return Tokenizer(vocab, merges)
