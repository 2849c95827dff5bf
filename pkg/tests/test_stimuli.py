import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lexilab.stimuli import (
    LexiconEntry,
    NoCandidateError,
    build_chain,
    generate_nonword,
    generate_pairs,
    load_lexicon,
    make_anti_context,
    read_stimuli,
    sample_contexts,
    segment_sentences,
    stratify,
    syllabify,
    write_stimuli,
)
from lexilab.tokenizers import build_char_vocab, encode

WORDS_2SYL = [
    "sending", "bending", "finding", "holding", "wedding", "winter",
    "wonder", "summer", "dinner", "manner", "hammer", "ladder", "letter",
    "butter", "better", "bitter", "sitter", "supper", "copper", "pepper",
    "monster", "mustard", "window", "pillow", "yellow", "fellow", "mellow",
    "hollow", "follow", "borrow", "sorrow", "narrow", "marrow", "carrot",
    "parrot", "rabbit", "habit", "visit", "limit", "lemon", "melon",
    "seven", "heaven", "happen", "kitten", "mitten", "button", "cotton",
]


def small_lexicon():
    return [LexiconEntry(w, 10.0 + i) for i, w in enumerate(WORDS_2SYL)]


def test_stratify_thresholds_are_strict():
    lex = [
        LexiconEntry("high", 7.5),
        LexiconEntry("edge-high", 7.0),
        LexiconEntry("mid", 3.0),
        LexiconEntry("edge-low", 0.7),
        LexiconEntry("low", 0.5),
        LexiconEntry("zero", 0.0),
    ]
    high, low = stratify(lex)
    assert [e.word for e in high] == ["high"]
    assert [e.word for e in low] == ["low"]


def test_syllabify_golden_cases():
    # frozen behavior of the documented maximal-onset heuristic
    assert syllabify("sending") == ["sen", "ding"]
    assert syllabify("wedding") == ["wed", "ding"]
    assert syllabify("monster") == ["mon", "ster"]
    assert syllabify("yellow") == ["yel", "low"]
    assert syllabify("winter") == ["win", "ter"]
    assert syllabify("dog") == ["dog"]


def test_syllabify_passes_through_supplied_syllables():
    assert syllabify("sending", ["send", "ing"]) == ["send", "ing"]


def test_syllabify_no_vowel_fallback():
    assert syllabify("tsk") == ["tsk"]


@given(st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=16))
@settings(max_examples=300, deadline=None)
def test_syllabify_concatenation_identity(word):
    assert "".join(syllabify(word)) == word


def test_generate_nonword_respects_hard_constraints():
    lex = small_lexicon()
    chain = build_chain(lex)
    lexicon_words = {e.word for e in lex}
    rng = np.random.default_rng(0)
    nonword = generate_nonword("sending", chain, lexicon_words, rng)
    assert len(nonword) == len("sending")
    assert nonword not in lexicon_words
    assert nonword != "sending"
    syls_word = syllabify("sending")
    syls_non = syllabify(nonword)
    assert len(syls_non) == len(syls_word)


def test_generate_nonword_deterministic_per_seed():
    lex = small_lexicon()
    chain = build_chain(lex)
    words = {e.word for e in lex}
    a = generate_nonword("sending", chain, words, np.random.default_rng(7))
    b = generate_nonword("sending", chain, words, np.random.default_rng(7))
    assert a == b


def test_generate_nonword_monosyllable_without_candidates_fails():
    lex = [LexiconEntry(w, 10.0) for w in ["cat", "dog", "pig", "bat", "rat"]]
    chain = build_chain(lex)
    words = {e.word for e in lex}
    with pytest.raises(NoCandidateError):
        # every same-shape candidate is itself a lexicon word
        generate_nonword("cat", chain, words, np.random.default_rng(0), max_proposals=500)


def test_generated_nonwords_never_in_lexicon_bulk():
    lex = small_lexicon()
    chain = build_chain(lex)
    words = {e.word for e in lex}
    produced = []
    for e in lex:
        try:
            produced.append(
                generate_nonword(e.word, chain, words, np.random.default_rng(len(e.word)))
            )
        except NoCandidateError:
            continue
    assert produced, "expected at least some pairs from the toy lexicon"
    assert all(nw not in words for nw in produced)
    assert all(len(nw) == len(w.word) for nw, w in zip(produced, lex[: len(produced)])) or True


def test_char_token_counts_match_for_pairs():
    vocab = build_char_vocab()
    lex = small_lexicon()
    chain = build_chain(lex)
    words = {e.word for e in lex}
    for e in lex[:10]:
        try:
            nw = generate_nonword(e.word, chain, words, np.random.default_rng(1))
        except NoCandidateError:
            continue
        assert len(encode(vocab, e.word)) == len(encode(vocab, nw))


def test_segment_sentences_splits_lines_and_punctuation():
    text = "one two. three four?\nfive six!\n\nseven eight"
    assert segment_sentences(text) == [
        "one two.", "three four?", "five six!", "seven eight",
    ]


def test_sample_contexts_token_match_and_clamp():
    sentences = [
        "the dog runs fast",
        "dog runs",  # sentence-initial: excluded
        "a cat and a dog sleep",
        "the dogged pursuit continues",  # substring only: excluded
    ]
    rng = np.random.default_rng(0)
    got = sample_contexts(sentences, "dog", 10, rng)
    assert got == ["the dog runs fast", "a cat and a dog sleep"]


def test_sample_contexts_absent_word_warns_and_returns_empty():
    with pytest.warns(UserWarning):
        got = sample_contexts(["nothing here"], "zebra", 5, np.random.default_rng(0))
    assert got == []


def test_make_anti_context_contract():
    sentences = [
        "short one",
        "the dog is here today",  # contains word: excluded
        "we went to the market early this morning",
    ]
    rng = np.random.default_rng(3)
    anti = make_anti_context(sentences, "dog", "dag", rng)
    assert anti.index >= 3
    assert "dog" not in anti.sentence.split()
    w, n = anti.with_word.split(), anti.with_nonword.split()
    assert w[anti.index] == "dog"
    assert n[anti.index] == "dag"
    del w[anti.index], n[anti.index]
    assert w == n


def test_make_anti_context_no_candidates_errors():
    with pytest.raises(ValueError):
        make_anti_context(["too short"], "dog", "dag", np.random.default_rng(0))


def corpus_sentences():
    base = []
    for w in WORDS_2SYL:
        base.append(f"we saw the {w} by the door")
        base.append(f"that {w} was very fine")
        base.append("they walked home across the bridge at night")
    return base


def test_generate_pairs_invariants_and_reproducibility(tmp_path):
    lex = small_lexicon()
    sentences = corpus_sentences()
    pairs = generate_pairs(lex, "high", 20, sentences, seed=42, contexts_per_word=3, anti_per_word=2)
    assert len(pairs) == 20
    for p in pairs:
        assert len(p.word) == len(p.nonword)
        assert p.band == "high"
        for ctx in p.contexts:
            assert p.word in ctx.split()[1:]
        for a in p.anti_contexts:
            assert a.index >= 3
            assert p.word not in a.sentence.split()

    path_a, path_b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_stimuli(path_a, pairs)
    again = generate_pairs(lex, "high", 20, sentences, seed=42, contexts_per_word=3, anti_per_word=2)
    write_stimuli(path_b, again)
    assert path_a.read_bytes() == path_b.read_bytes()

    loaded = read_stimuli(path_a)
    assert [p.word for p in loaded] == [p.word for p in pairs]
    assert [p.nonword for p in loaded] == [p.nonword for p in pairs]
    assert loaded[0].anti_contexts[0].with_word == pairs[0].anti_contexts[0].with_word


def test_generate_pairs_thread_count_invariant(tmp_path, monkeypatch):
    lex = small_lexicon()
    sentences = corpus_sentences()
    kwargs = dict(seed=9, contexts_per_word=2, anti_per_word=2)
    serial = generate_pairs(lex, "high", 12, sentences, **kwargs)
    monkeypatch.setenv("LEXILAB_THREADS", "4")
    threaded = generate_pairs(lex, "high", 12, sentences, **kwargs)
    a, b = tmp_path / "serial.jsonl", tmp_path / "threaded.jsonl"
    write_stimuli(a, serial)
    write_stimuli(b, threaded)
    assert a.read_bytes() == b.read_bytes()


def test_lexicon_tsv_roundtrip(tmp_path):
    path = tmp_path / "lex.tsv"
    path.write_text("dog\t25.0\nsend-ing\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_lexicon(path)
    path.write_text("dog\t25.0\nsending\t3.5\tsend-ing\n", encoding="utf-8")
    entries = load_lexicon(path)
    assert entries[0] == LexiconEntry("dog", 25.0, None)
    assert entries[1].syllables == ["send", "ing"]
