"""Word/non-word minimal-pair stimuli.

Non-words are built by swapping one (or, failing that, two) syllables of a
real word for same-length syllables drawn from a syllable chain fitted on
the lexicon.  Hard constraints: character length and syllable count are
preserved, the result is not a lexicon word, and every rewritten junction
keeps its add-one-smoothed bigram count within a factor of [1/4, 4] of the
original junction's count.  Generation is reproducible: each word gets its
own rng derived from the run seed.

Context sentences (for in-context scoring) and anti-context sentences
(random insertion at word index >= 3) come from a sentence-segmented
corpus supplied by the caller.
"""

from __future__ import annotations

import json
import re
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .config import derive_seed, worker_count

HIGH_FREQ_THRESHOLD = 7.0
LOW_FREQ_UPPER = 0.7

WORD_START = "<w"
WORD_END = "w>"

DEFAULT_BAND = (0.25, 4.0)
DEFAULT_MAX_PROPOSALS = 10_000

VOWELS = frozenset("aeiouy")

# fixed English onset inventory for the maximal-onset split
ONSETS = frozenset(
    list("bcdfghjklmnpqrstvwxyz")
    + [
        "bl", "br", "ch", "chr", "cl", "cr", "dr", "dw", "fl", "fr", "gl",
        "gn", "gr", "kn", "ph", "pl", "pr", "ps", "qu", "rh", "sc", "sch",
        "scr", "sh", "shr", "sk", "sl", "sm", "sn", "sp", "sph", "spl",
        "spr", "squ", "st", "str", "sw", "th", "thr", "tr", "tw", "wh", "wr",
    ]
)


class NoCandidateError(RuntimeError):
    """No admissible non-word found within the proposal budget."""


@dataclass
class LexiconEntry:
    word: str
    freq_per_million: float
    syllables: list[str] | None = None


@dataclass
class AntiContext:
    sentence: str  # normalized, does not contain the target word
    index: int  # 0-based insertion position, >= 3
    with_word: str
    with_nonword: str


@dataclass
class StimulusPair:
    word: str
    nonword: str
    band: str  # "high" | "low"
    contexts: list[str] = field(default_factory=list)
    anti_contexts: list[AntiContext] = field(default_factory=list)


def load_lexicon(path: str | Path) -> list[LexiconEntry]:
    """TSV rows: word<TAB>freq_per_million[<TAB>syl-la-bles]."""
    entries = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.rstrip("\n").split("\t")
        if len(fields) < 2:
            raise ValueError(f"{path}:{lineno}: expected word<TAB>freq")
        word = fields[0]
        freq = float(fields[1])
        if freq < 0:
            raise ValueError(f"{path}:{lineno}: negative frequency")
        syllables = fields[2].split("-") if len(fields) > 2 and fields[2] else None
        if syllables is not None and "".join(syllables) != word:
            raise ValueError(f"{path}:{lineno}: syllables do not spell the word")
        entries.append(LexiconEntry(word, freq, syllables))
    return entries


def stratify(lexicon: Iterable[LexiconEntry]) -> tuple[list[LexiconEntry], list[LexiconEntry]]:
    """High band: freq > 7.0 per million.  Low band: 0.0 < freq < 0.7.
    Thresholds are strict; everything else is excluded."""
    high = [e for e in lexicon if e.freq_per_million > HIGH_FREQ_THRESHOLD]
    low = [e for e in lexicon if 0.0 < e.freq_per_million < LOW_FREQ_UPPER]
    return high, low


def syllabify(word: str, syllables: Sequence[str] | None = None) -> list[str]:
    """Pre-supplied syllables pass through; otherwise split before each
    vowel-group onset with a maximal-onset rule over the fixed onset list.
    The pieces always concatenate back to the word."""
    if syllables:
        return list(syllables)
    lower = word.lower()
    is_vowel = [c in VOWELS for c in lower]
    if not any(is_vowel):
        return [word]
    # maximal runs of vowels
    runs = []
    i = 0
    while i < len(lower):
        if is_vowel[i]:
            j = i
            while j + 1 < len(lower) and is_vowel[j + 1]:
                j += 1
            runs.append((i, j))
            i = j + 1
        else:
            i += 1
    boundaries = []
    for (_, end_a), (start_b, _) in zip(runs, runs[1:]):
        cluster = lower[end_a + 1 : start_b]
        split = len(cluster)  # default: whole cluster stays with the left syllable
        for k in range(len(cluster) + 1):
            if cluster[k:] == "" and k == len(cluster):
                split = k
                break
            if cluster[k:] in ONSETS:
                split = k
                break
        boundaries.append(end_a + 1 + split)
    pieces = []
    prev = 0
    for b in boundaries:
        pieces.append(word[prev:b])
        prev = b
    pieces.append(word[prev:])
    return [p for p in pieces if p]


@dataclass
class SyllableChain:
    """Syllable-bigram statistics over a lexicon, with word-boundary
    markers, plus per-(syllable count, position) inventories."""

    transitions: Counter = field(default_factory=Counter)
    inventory: dict = field(default_factory=lambda: defaultdict(set))
    _candidates: dict = field(default_factory=dict, repr=False)

    def smoothed(self, left: str, right: str) -> float:
        return self.transitions.get((left, right), 0) + 1.0

    def add_word(self, syllables: Sequence[str]) -> None:
        syls = [s.lower() for s in syllables]
        chain = [WORD_START, *syls, WORD_END]
        for pair in zip(chain, chain[1:]):
            self.transitions[pair] += 1
        n = len(syls)
        for pos, syl in enumerate(syls):
            self.inventory[(n, pos)].add(syl)
        self._candidates.clear()

    def candidates(self, n: int, pos: int, length: int) -> tuple[str, ...]:
        key = (n, pos, length)
        if key not in self._candidates:
            self._candidates[key] = tuple(
                sorted(s for s in self.inventory.get((n, pos), ()) if len(s) == length)
            )
        return self._candidates[key]


def build_chain(lexicon: Iterable[LexiconEntry]) -> SyllableChain:
    chain = SyllableChain()
    for entry in lexicon:
        if not entry.word.isalpha():
            continue
        chain.add_word(syllabify(entry.word, entry.syllables))
    return chain


def _band_ok(chain: SyllableChain, orig: tuple[str, str], new: tuple[str, str], band) -> bool:
    reference = chain.smoothed(*orig)
    return band[0] * reference <= chain.smoothed(*new) <= band[1] * reference


def _junctions_ok(
    chain: SyllableChain,
    original: list[str],
    candidate: list[str],
    changed: set[int],
    band,
) -> bool:
    orig = [WORD_START, *original, WORD_END]
    cand = [WORD_START, *candidate, WORD_END]
    for p in changed:
        i = p + 1  # offset for the start marker
        if not _band_ok(chain, (orig[i - 1], orig[i]), (cand[i - 1], cand[i]), band):
            return False
        if not _band_ok(chain, (orig[i], orig[i + 1]), (cand[i], cand[i + 1]), band):
            return False
    return True


def generate_nonword(
    word: str,
    chain: SyllableChain,
    lexicon_words: set[str],
    rng: np.random.Generator,
    syllables: Sequence[str] | None = None,
    band: tuple[float, float] = DEFAULT_BAND,
    max_proposals: int = DEFAULT_MAX_PROPOSALS,
) -> str:
    """Swap one syllable (two as a fallback) for a same-length syllable
    sampled from the chain; see the module docstring for the constraints."""
    if not word.isalpha():
        raise NoCandidateError(f"{word!r} is not alphabetic")
    original = [s.lower() for s in syllabify(word, syllables)]
    n = len(original)
    lower_word = word.lower()
    heuristic_word = [s.lower() for s in syllabify(lower_word)]

    def propose(positions: tuple[int, ...]) -> str | None:
        candidate = list(original)
        for p in positions:
            options = chain.candidates(n, p, len(original[p]))
            if not options:
                return None
            pick = options[int(rng.integers(len(options)))]
            if pick == original[p]:
                return None
            candidate[p] = pick
        if not _junctions_ok(chain, original, candidate, set(positions), band):
            return None
        result = "".join(candidate)
        if result == lower_word or result in lexicon_words:
            return None
        # replacements can shift re-derived syllable boundaries; keep only
        # candidates whose own syllabification still matches the word's
        # count and differs in at most two positions
        resyl = syllabify(result)
        if len(resyl) != len(heuristic_word):
            return None
        if sum(a != b for a, b in zip(resyl, heuristic_word)) > 2:
            return None
        return result

    single_budget = max_proposals if n < 2 else max_proposals // 2
    for _ in range(single_budget):
        result = propose((int(rng.integers(n)),))
        if result is not None:
            return result
    if n >= 2:
        for _ in range(max_proposals - single_budget):
            p1 = int(rng.integers(n))
            p2 = int(rng.integers(n - 1))
            if p2 >= p1:
                p2 += 1
            result = propose(tuple(sorted((p1, p2))))
            if result is not None:
                return result
    raise NoCandidateError(f"no admissible non-word for {word!r} within budget")


_SENTENCE_SPLIT = re.compile(r"(?<=[.?!])\s+")


def segment_sentences(text: str) -> list[str]:
    """Line boundaries segment; within a line, split after .?! + whitespace."""
    sentences = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        sentences.extend(s for s in _SENTENCE_SPLIT.split(line) if s)
    return sentences


def _uniform_sample(items: list, n: int, rng: np.random.Generator) -> list:
    if len(items) <= n:
        return list(items)
    chosen = rng.choice(len(items), size=n, replace=False)
    return [items[i] for i in sorted(chosen)]


def sample_contexts(
    sentences: Sequence[str], word: str, n: int, rng: np.random.Generator
) -> list[str]:
    """Up to n distinct sentences containing ``word`` as a whitespace token
    in non-initial position (so a surprisal prefix exists)."""
    matches = [s for s in sentences if word in s.split()[1:]]
    if not matches:
        warnings.warn(f"no context sentences contain {word!r}", stacklevel=2)
        return []
    return _uniform_sample(matches, n, rng)


def make_anti_context(
    sentences: Sequence[str],
    word: str,
    nonword: str,
    rng: np.random.Generator,
) -> AntiContext:
    """Insert word and nonword at the same random index >= 3 of a sentence
    that does not contain the word."""
    eligible = [
        s for s in sentences if len(s.split()) >= 4 and word not in s.split()
    ]
    if not eligible:
        raise ValueError(f"no sentence of >= 4 words lacks {word!r}")
    sentence = eligible[int(rng.integers(len(eligible)))]
    return _insert_probe(sentence, word, nonword, rng)


def _insert_probe(
    sentence: str, word: str, nonword: str, rng: np.random.Generator
) -> AntiContext:
    tokens = sentence.split()
    index = int(rng.integers(3, len(tokens) + 1))
    with_word = " ".join(tokens[:index] + [word] + tokens[index:])
    with_nonword = " ".join(tokens[:index] + [nonword] + tokens[index:])
    return AntiContext(" ".join(tokens), index, with_word, with_nonword)


def generate_pairs(
    lexicon: Sequence[LexiconEntry],
    band: str,
    n_pairs: int,
    sentences: Sequence[str],
    seed: int,
    contexts_per_word: int = 10,
    anti_per_word: int = 10,
    chain: SyllableChain | None = None,
    max_proposals: int = DEFAULT_MAX_PROPOSALS,
) -> list[StimulusPair]:
    """Build up to ``n_pairs`` stimulus pairs for one frequency band.

    Deterministic for a fixed lexicon, corpus, and seed: candidate words
    are sampled with a band-level rng, and every word gets its own derived
    rng, so dropping or parallelizing individual words cannot shift any
    other word's output.
    """
    high, low = stratify(lexicon)
    pool = {"high": high, "low": low}[band]
    eligible = sorted(
        {e.word.lower(): e for e in pool if e.word.isalpha()}.values(),
        key=lambda e: e.word.lower(),
    )
    if chain is None:
        chain = build_chain(lexicon)
    lexicon_words = {e.word.lower() for e in lexicon}

    order_rng = np.random.default_rng(derive_seed(seed, "stimuli-order", band))
    order = order_rng.permutation(len(eligible))

    # sentence index: word -> positions of usable context sentences
    token_lists = [s.split() for s in sentences]
    context_index: dict[str, list[int]] = defaultdict(list)
    containing: dict[str, set[int]] = defaultdict(set)
    for si, toks in enumerate(token_lists):
        for pos, tok in enumerate(toks):
            containing[tok].add(si)
            if pos >= 1:
                if not context_index[tok] or context_index[tok][-1] != si:
                    context_index[tok].append(si)
    long_sentences = [si for si, toks in enumerate(token_lists) if len(toks) >= 4]

    def build_one(entry: LexiconEntry) -> StimulusPair | None:
        word = entry.word.lower()
        word_rng = np.random.default_rng(derive_seed(seed, "stimuli-word", word))
        try:
            nonword = generate_nonword(
                word, chain, lexicon_words, word_rng,
                syllables=entry.syllables, max_proposals=max_proposals,
            )
        except NoCandidateError:
            return None
        context_ids = _uniform_sample(
            context_index.get(word, []), contexts_per_word, word_rng
        )
        contexts = [sentences[si] for si in context_ids]
        anti: list[AntiContext] = []
        if long_sentences:
            bad = containing.get(word, set())
            usable = [si for si in long_sentences if si not in bad]
            for si in _uniform_sample(usable, anti_per_word, word_rng):
                anti.append(_insert_probe(sentences[si], word, nonword, word_rng))
        return StimulusPair(
            word=word, nonword=nonword, band=band,
            contexts=contexts, anti_contexts=anti,
        )

    # every word draws from its own derived rng, so parallel workers cannot
    # perturb each other's output and the result is thread-count invariant
    pairs: list[StimulusPair] = []
    workers = worker_count()
    cursor = 0
    while cursor < len(order) and len(pairs) < n_pairs:
        chunk = [eligible[i] for i in order[cursor : cursor + max(64, 2 * n_pairs)]]
        cursor += len(chunk)
        if workers > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(build_one, chunk))
        else:
            results = [build_one(e) for e in chunk]
        for pair in results:
            if pair is not None and len(pairs) < n_pairs:
                pairs.append(pair)
    return pairs


def write_stimuli(path: str | Path, pairs: Iterable[StimulusPair]) -> None:
    """JSONL, one pair per line; byte-stable for identical inputs."""
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            record = {
                "word": pair.word,
                "nonword": pair.nonword,
                "band": pair.band,
                "contexts": pair.contexts,
                "anti": [
                    {"sentence": a.sentence, "index": a.index}
                    for a in pair.anti_contexts
                ],
            }
            fh.write(json.dumps(record, sort_keys=True, ensure_ascii=True) + "\n")


def read_stimuli(path: str | Path) -> list[StimulusPair]:
    pairs = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        anti = []
        for a in doc.get("anti", []):
            tokens = a["sentence"].split()
            index = int(a["index"])
            with_word = " ".join(tokens[:index] + [doc["word"]] + tokens[index:])
            with_nonword = " ".join(tokens[:index] + [doc["nonword"]] + tokens[index:])
            anti.append(AntiContext(a["sentence"], index, with_word, with_nonword))
        pairs.append(
            StimulusPair(
                word=doc["word"],
                nonword=doc["nonword"],
                band=doc["band"],
                contexts=list(doc.get("contexts", [])),
                anti_contexts=anti,
            )
        )
    return pairs
