import json
import string

import numpy as np
import pytest

from lexilab.evaluation import (
    EvalRecord,
    Scorer,
    anti_surprisal_decision,
    lexical_decision,
    load_suite,
    minimal_pair_accuracy,
    read_results,
    score_pairs,
    span_request,
    summarize,
    surprisal_decision,
    token_surprisals,
    word_span_surprisal,
    write_results,
)
from lexilab.model import ModelConfig, init_params
from lexilab.stimuli import AntiContext, StimulusPair
from lexilab.tokenizers import (
    BOS_TOKEN,
    EOS_PAD_TOKEN,
    Tokenizer,
    Vocab,
    build_char_vocab,
)

CHAR = ModelConfig(vocab_size=102, hidden=32, layers=2, heads=2, context=64)


def char_scorer(seed=0, batch_size=16):
    tok = Tokenizer(build_char_vocab())
    params = init_params(CHAR, seed=seed)
    return Scorer(params, CHAR, tok, batch_size=batch_size), tok, params


def uniform_scorer():
    scorer, tok, params = char_scorer()
    params["head"] = np.zeros_like(params["head"])
    return scorer, tok, params


def closed_form_model():
    """Constant embedding + zero blocks: logits equal the column sums of the
    output head at every position, so token probabilities have a closed form."""
    config = ModelConfig(vocab_size=4, hidden=4, layers=1, heads=2, context=16)
    params = init_params(config, seed=0)
    for name in params:
        if name.endswith("norm"):
            continue
        params[name] = np.zeros_like(params[name])
    params["embed"][:] = 100.0
    logit_targets = np.log([1.0, 2.0, 4.0, 8.0]).astype(np.float32)
    params["head"][0, :] = logit_targets
    vocab = Vocab(scheme="char", tokens=[BOS_TOKEN, EOS_PAD_TOKEN, "a", "b"])
    return config, params, Tokenizer(vocab), logit_targets


def test_uniform_model_token_surprisals_are_log_vocab():
    scorer, tok, params = uniform_scorer()
    sur = token_surprisals(params, CHAR, tok, "hello")
    assert sur.shape == (5,)
    assert np.allclose(sur, np.log(102), atol=1e-6)


def test_closed_form_surprisals_match_analytic():
    config, params, tok, logits = closed_form_model()
    probs = np.exp(logits) / np.exp(logits).sum()
    sur = token_surprisals(params, config, tok, "ab")
    expected = [-np.log(probs[2]), -np.log(probs[3])]
    assert np.allclose(sur, expected, atol=1e-6)


def test_sum_of_surprisals_is_sequence_neg_log_prob():
    scorer, tok, params = char_scorer(seed=4)
    text = "chain rule"
    sur = token_surprisals(params, CHAR, tok, text)
    # independent path: full float64 log-softmax via forward()
    from lexilab.model import forward

    ids = tok.encode(text)
    inputs = np.array([tok.vocab.bos_id] + ids[:-1])
    logprobs = forward(params, CHAR, inputs)
    total = -sum(logprobs[i, ids[i]] for i in range(len(ids)))
    assert sur.sum() == pytest.approx(total, abs=1e-6)
    totals = scorer.sequence_totals([text])
    assert totals[0] == pytest.approx(total, abs=1e-6)


def test_char_span_covers_one_value_per_character():
    scorer, tok, params = char_scorer()
    ids, idxs, fallback = span_request(tok, " ", "doggy", CHAR.context)
    assert len(idxs) == 5
    assert not fallback
    value, fb = word_span_surprisal(params, CHAR, tok, " ", "doggy")
    sur = token_surprisals(params, CHAR, tok, " doggy")
    assert value == pytest.approx(float(sur[1:].mean()))
    assert not fb


def test_single_token_word_surprisal_is_that_token():
    config, params, tok, _ = closed_form_model()
    value, _ = word_span_surprisal(params, config, tok, "a", "b")
    sur = token_surprisals(params, config, tok, "ab")
    assert value == pytest.approx(float(sur[1]))


def test_mean_halves_the_sum_for_two_token_word():
    scorer, tok, params = char_scorer()
    value, _ = word_span_surprisal(params, CHAR, tok, " ", "ab")
    sur = token_surprisals(params, CHAR, tok, " ab")
    assert value == pytest.approx(float(sur[1:].sum()) / 2.0)


def test_lexical_decision_tie_counts_incorrect():
    scorer, tok, params = uniform_scorer()
    pair = StimulusPair(word="same", nonword="same", band="high")
    probe = lexical_decision(scorer, pair)
    assert probe.surprisal_word == probe.surprisal_nonword
    assert not probe.correct


def test_untrained_model_near_chance_on_independent_pairs():
    scorer, tok, params = char_scorer(seed=123)
    rng = np.random.default_rng(0)
    letters = np.array(list(string.ascii_lowercase))
    pairs = []
    for _ in range(300):
        w = "".join(rng.choice(letters, size=5))
        n = "".join(rng.choice(letters, size=5))
        if w == n:
            continue
        pairs.append(StimulusPair(word=w, nonword=n, band="high"))
    outcomes = score_pairs(scorer, pairs, "lexdec")
    acc = np.mean([o.correct for o in outcomes])
    assert abs(acc - 0.5) < 0.1


def test_char_mean_and_sum_decisions_agree():
    # char spans of a matched pair have equal token counts, so comparing
    # means and comparing sums give the same verdict
    scorer, tok, params = char_scorer(seed=31)
    rng = np.random.default_rng(2)
    letters = np.array(list(string.ascii_lowercase))
    for _ in range(40):
        w = "".join(rng.choice(letters, size=6))
        n = "".join(rng.choice(letters, size=6))
        if w == n:
            continue
        sw = token_surprisals(params, CHAR, tok, " " + w)[1:]
        sn = token_surprisals(params, CHAR, tok, " " + n)[1:]
        assert len(sw) == len(sn)
        assert (sw.mean() < sn.mean()) == (sw.sum() < sn.sum())


def test_swapping_pair_labels_complements_accuracy():
    scorer, tok, params = char_scorer(seed=9)
    rng = np.random.default_rng(1)
    letters = np.array(list(string.ascii_lowercase))
    pairs, swapped = [], []
    for _ in range(60):
        w = "".join(rng.choice(letters, size=6))
        n = "".join(rng.choice(letters, size=6))
        if w == n:
            continue
        pairs.append(StimulusPair(word=w, nonword=n, band="high"))
        swapped.append(StimulusPair(word=n, nonword=w, band="high"))
    acc = summarize(score_pairs(scorer, pairs, "lexdec"), 0, "lexdec", "high").accuracy
    acc_swapped = summarize(
        score_pairs(scorer, swapped, "lexdec"), 0, "lexdec", "high"
    ).accuracy
    assert acc + acc_swapped == pytest.approx(1.0)


def bigram_table_model(table: dict[tuple[str, str], float], alphabet: str):
    """A transformer whose logits depend only on the current token: zero
    attention/FFN projections keep h_t = embed[x_t], one-hot embeddings make
    rmsnorm(h_t) a scaled one-hot, and the output head holds the bigram
    log-probability table."""
    tokens = [BOS_TOKEN, EOS_PAD_TOKEN, *alphabet]
    vocab = Vocab(scheme="char", tokens=tokens)
    V = len(tokens)
    config = ModelConfig(vocab_size=V, hidden=V, layers=1, heads=2, context=32)
    params = init_params(config, seed=0)
    for name in params:
        if not name.endswith("norm"):
            params[name] = np.zeros_like(params[name])
    params["embed"] = np.eye(V, dtype=np.float32) * 7.0
    # rmsnorm maps the hot coordinate to sqrt(V); divide it back out
    scale = 1.0 / np.sqrt(V)
    head = np.full((V, V), np.log(1e-6), dtype=np.float32)
    for (prev, nxt), logp in table.items():
        head[vocab.id_of[prev], vocab.id_of[nxt]] = logp
    params["head"] = head * scale
    return params, config, Tokenizer(vocab)


def test_surprisal_decision_prefers_seen_bigrams():
    # constructed oracle: a literal character-bigram table that has seen the
    # bigrams of "dog" but not those of "dag"
    alphabet = " adgow"
    likely, unlikely = np.log(0.5), np.log(1e-4)
    table = {}
    for prev in alphabet:
        for nxt in alphabet:
            table[(prev, nxt)] = unlikely
    for bigram in [(" ", "d"), ("d", "o"), ("o", "g"), ("w", " "), ("a", "w")]:
        table[bigram] = likely
    table[("d", "a")] = np.log(0.01)  # "da" seen rarely; "ag" never boosted
    params, config, tok = bigram_table_model(table, alphabet)
    scorer = Scorer(params, config, tok)
    pair = StimulusPair(word="dog", nonword="dag", band="high")
    probe = surprisal_decision(scorer, pair, "aw aw dog aw")
    assert probe.correct
    assert probe.surprisal_word < probe.surprisal_nonword


def test_surprisal_decision_uses_sentence_prefix():
    scorer, tok, params = char_scorer(seed=2)
    pair = StimulusPair(word="dog", nonword="dag", band="high")
    probe = surprisal_decision(scorer, pair, "we saw the dog by the gate")
    # identical to scoring with the explicit prefix
    vw, _ = word_span_surprisal(params, CHAR, tok, "we saw the ", "dog")
    vn, _ = word_span_surprisal(params, CHAR, tok, "we saw the ", "dag")
    assert probe.surprisal_word == pytest.approx(vw)
    assert probe.surprisal_nonword == pytest.approx(vn)


def test_surprisal_decision_word_missing_errors():
    scorer, _, _ = char_scorer()
    pair = StimulusPair(word="dog", nonword="dag", band="high")
    with pytest.raises(ValueError):
        surprisal_decision(scorer, pair, "no animal here at all")


def test_anti_surprisal_prefix_has_at_least_three_words():
    scorer, tok, params = char_scorer(seed=5)
    pair = StimulusPair(word="dog", nonword="dag", band="high")
    anti = AntiContext(
        sentence="they walked home late",
        index=3,
        with_word="they walked home dog late",
        with_nonword="they walked home dag late",
    )
    probe = anti_surprisal_decision(scorer, pair, anti)
    vw, _ = word_span_surprisal(params, CHAR, tok, "they walked home ", "dog")
    assert probe.surprisal_word == pytest.approx(vw)
    bad = AntiContext("they walked home late", 2, "", "")
    with pytest.raises(ValueError):
        anti_surprisal_decision(scorer, pair, bad)


def test_majority_over_contexts_decides_pair():
    scorer, tok, params = char_scorer(seed=8)
    pair = StimulusPair(
        word="dog",
        nonword="dag",
        band="high",
        contexts=[
            "we saw the dog today",
            "she fed a dog yesterday",
            "there was some dog outside",
        ],
    )
    outcomes = score_pairs(scorer, [pair], "surprisal")
    assert len(outcomes) == 1
    probes = outcomes[0].probes
    assert len(probes) == 3
    wins = sum(p.correct for p in probes)
    assert outcomes[0].correct == (wins * 2 > len(probes))


def test_blimp_tie_and_overall_mean():
    scorer, tok, params = uniform_scorer()
    from lexilab.evaluation import SuiteItem

    items = [
        SuiteItem("same sentence", "same sentence", "tie-case"),
        # uniform model: total surprisal grows with token count, so the
        # shorter sentence wins
        SuiteItem("ab", "abcd", "short-good"),
        SuiteItem("abcd", "ab", "long-good"),
    ]
    table, overall = minimal_pair_accuracy(scorer, items)
    assert table["tie-case"][1] == 0.0
    assert table["short-good"][1] == 1.0
    assert table["long-good"][1] == 0.0
    assert overall == pytest.approx(np.mean([0.0, 1.0, 0.0]))


def test_suite_loader_skips_malformed_records(tmp_path):
    path = tmp_path / "suite.jsonl"
    path.write_text(
        json.dumps(
            {"sentence_good": "a b", "sentence_bad": "b a", "phenomenon": "order"}
        )
        + "\nnot json\n"
        + json.dumps({"sentence_good": "x"})
        + "\n",
        encoding="utf-8",
    )
    items, skipped = load_suite(path)
    assert len(items) == 1
    assert skipped == 2


def test_results_csv_roundtrip(tmp_path):
    records = [
        EvalRecord(10, "lexdec", "high", 100, 0.97, 1.25),
        EvalRecord(10, "blimp", "agreement", 50, 0.5, 0.0),
    ]
    path = tmp_path / "results.csv"
    write_results(path, records)
    again = read_results(path)
    assert again == records


def test_probe_correct_iff_strictly_lower():
    from lexilab.evaluation import ProbeResult

    assert ProbeResult("w", "lexdec", 1.0, 2.0).correct
    assert not ProbeResult("w", "lexdec", 2.0, 1.0).correct
    assert not ProbeResult("w", "lexdec", 1.5, 1.5).correct
