import string

from lexilab.demo import (
    adverb_of,
    build_demo_data,
    demo_lexicon,
    plural_of,
    verb_forms,
)
from lexilab.stimuli import stratify, syllabify
from lexilab.tokenizers import build_char_vocab, encode


def test_plural_morphology():
    assert plural_of("dog") == "dogs"
    assert plural_of("box") == "boxes"
    assert plural_of("church") == "churches"
    assert plural_of("berry") == "berries"
    assert plural_of("boy") == "boys"
    assert plural_of("child") == "children"
    assert plural_of("knife") == "knives"


def test_verb_morphology():
    assert verb_forms("walk") == ("walks", "walked", "walking")
    assert verb_forms("bake") == ("bakes", "baked", "baking")
    assert verb_forms("try") == ("tries", "tried", "trying")
    assert verb_forms("stop") == ("stops", "stopped", "stopping")
    assert verb_forms("go") == ("goes", "went", "going")
    assert verb_forms("see") == ("sees", "saw", "seeing")


def test_adverb_derivation():
    assert adverb_of("quick") == "quickly"
    assert adverb_of("happy") == "happily"
    assert adverb_of("gentle") == "gently"
    assert adverb_of("friendly") is None
    assert adverb_of("afraid") is None


def test_lexicon_is_clean():
    lex = demo_lexicon()
    words = [e.word for e in lex]
    assert len(words) == len(set(words))
    printable = set(string.printable)
    for e in lex:
        assert e.freq_per_million > 0
        assert set(e.word) <= printable
        assert e.word == e.word.lower()


def test_lexicon_band_sizes_support_large_stimulus_sets():
    lex = demo_lexicon()
    high, low = stratify(lex)
    poly_high = [e for e in high if e.word.isalpha() and len(syllabify(e.word)) >= 2]
    poly_low = [e for e in low if e.word.isalpha() and len(syllabify(e.word)) >= 2]
    assert len(poly_high) >= 1200
    assert len(poly_low) >= 1100


def test_demo_data_is_deterministic(tmp_path):
    a = build_demo_data(tmp_path / "a", n_words=2000, seed=3)
    b = build_demo_data(tmp_path / "b", n_words=2000, seed=3)
    assert a.corpus_path.read_bytes() == b.corpus_path.read_bytes()
    assert a.lexicon_path.read_bytes() == b.lexicon_path.read_bytes()
    c = build_demo_data(tmp_path / "c", n_words=2000, seed=4)
    assert a.corpus_path.read_bytes() != c.corpus_path.read_bytes()


def test_demo_corpus_shape(tiny_demo):
    text = tiny_demo.corpus_path.read_text()
    lines = [l for l in text.splitlines() if l]
    assert tiny_demo.n_words >= 4000
    vocab = build_char_vocab()
    for line in lines[:200]:
        assert line[0].isupper() or not line[0].isalpha()
        assert line[-1] in ".?!"
        encode(vocab, line)  # raises on non-printable characters


def test_demo_corpus_word_count_near_target(tmp_path):
    data = build_demo_data(tmp_path / "d", n_words=3000, seed=0)
    actual = sum(len(l.split()) for l in data.corpus_path.read_text().splitlines())
    actual += sum(len(l.split()) for l in data.held_out_path.read_text().splitlines())
    assert actual == data.n_words
    assert 3000 <= actual < 3100
