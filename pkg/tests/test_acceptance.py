"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s`.  Criteria 4 and 5 train
real models on the CPU; criterion 5 alone takes on the order of an hour
(deselect with `-m "not slow"` during development).
"""

import numpy as np
import pytest

from lexilab.analysis import evaluate_fit, polyfit_quintic, spearman
from lexilab.config import ExperimentConfig, preset_config
from lexilab.demo import build_demo_data
from lexilab.evaluation import (
    Scorer,
    SuiteItem,
    evaluate_pair_protocols,
    minimal_pair_accuracy,
)
from lexilab.model import count_params, init_params, load_checkpoint, token_cross_entropy
from lexilab.pipeline import run_pipeline
from lexilab.stimuli import (
    generate_pairs,
    load_lexicon,
    segment_sentences,
    syllabify,
    write_stimuli,
)
from lexilab.tokenizers import Tokenizer, build_char_vocab, train_bpe
from lexilab.trainer import TrainPlan, checkpoint_schedule, perplexity, train
from oracles import spearman_bruteforce
from test_model import max_gradcheck_error


def report(number: int, ok: bool, detail: str) -> None:
    print(f"\n[acceptance {number:02d}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


@pytest.fixture(scope="session")
def full_demo(tmp_path_factory):
    """The >= 2M-word generated corpus + lexicon used by criteria 5 and 7."""
    out = tmp_path_factory.mktemp("full-demo")
    return build_demo_data(out, n_words=2_050_000, seed=0)


def test_criterion_01_parameter_census():
    expected = {
        "small-char": 486_016,
        "medium-char": 3_726_592,
        "large-char": 21_940_736,
        "small-bpe": 2_508_416,
        "medium-bpe": 7_771_392,
        "large-bpe": 30_030_336,
    }
    got = {name: count_params(preset_config(name)) for name in expected}
    report(
        1,
        got == expected,
        f"preset parameter counts {got}",
    )


def test_criterion_02_gradient_correctness():
    worst = max_gradcheck_error(seed=5, eps=1e-3)
    report(
        2,
        worst < 1e-4,
        f"2-layer/hidden-16/vocab-11 analytic vs central differences: "
        f"max relative error {worst:.2e} (bound 1e-4)",
    )


def test_criterion_03_initialization_entropy():
    rng = np.random.default_rng(0)
    details = []
    ok = True
    for preset in ("small-char", "small-bpe"):
        config = preset_config(preset)
        params = init_params(config, seed=1)
        tokens = rng.integers(2, config.vocab_size, size=(4, 33))
        total, n = token_cross_entropy(params, config, tokens)
        mean_ce = total / n
        target = np.log(config.vocab_size)
        ok = ok and abs(mean_ce - target) < 0.05 * target
        details.append(f"{preset}: CE {mean_ce:.3f} vs ln(V) {target:.3f}")
    report(3, ok, "; ".join(details))


def _scramble(sentence: str, rng: np.random.Generator) -> str:
    words = sentence.split()
    for _ in range(20):
        perm = list(rng.permutation(len(words)))
        shuffled = [words[i] for i in perm]
        if shuffled != words:
            return " ".join(shuffled)
    return " ".join(reversed(words))


@pytest.mark.slow
def test_criterion_04_memorization_smoke(tmp_path):
    sentences = []
    rng = np.random.default_rng(3)
    from lexilab.demo import _Sampler, render_sentence

    sampler = _Sampler(np.random.default_rng(11))
    while len(sentences) < 50:
        s = render_sentence(sampler)
        if 4 <= len(s.split()) <= 9:
            sentences.append(s)

    config = preset_config("small-char")
    tokenizer = Tokenizer(build_char_vocab())
    # the 50 sentences as ten 5-sentence documents: within-document
    # transitions stay deterministic (memorizable to ~zero loss) while the
    # per-epoch document shuffle varies absolute positions, so what is
    # memorized transfers to BOS-anchored scoring
    docs = [" ".join(sentences[i * 5 : (i + 1) * 5]) for i in range(10)]
    plan = TrainPlan(total_steps=500, batch_size=8, peak_lr=2e-3, seed=0, log_every=50)
    result = train(config, tokenizer, docs, plan, tmp_path / "memo")

    suite = [
        SuiteItem(s, _scramble(s, rng), "memorized") for s in sentences
    ]
    step, ck_config, params, _ = load_checkpoint(
        result.checkpoint_dirs[plan.checkpoint_steps[-1]]
    )
    scorer = Scorer(params, ck_config, tokenizer)
    table, overall = minimal_pair_accuracy(scorer, suite)

    ppls = []
    for s in plan.checkpoint_steps:
        _, cfg_s, params_s, _ = load_checkpoint(result.checkpoint_dirs[s])
        ppls.append(perplexity(params_s, cfg_s, tokenizer, sentences))
    smoothed = [np.mean(ppls[i : i + 3]) for i in range(len(ppls) - 2)]
    monotone = all(a >= b - 1e-9 for a, b in zip(smoothed, smoothed[1:]))

    ok = result.final_loss < 0.1 and overall == 1.0 and monotone
    report(
        4,
        ok,
        f"final loss {result.final_loss:.4f} (< 0.1), minimal-pair accuracy "
        f"{overall:.3f} (= 1.0), smoothed perplexity monotone: {monotone}",
    )


@pytest.mark.slow
def test_criterion_05_directional_replication(full_demo, tmp_path):
    docs = [l for l in full_demo.corpus_path.read_text().splitlines() if l]
    n_corpus_words = sum(len(l.split()) for l in docs)
    assert n_corpus_words >= 2_000_000

    lexicon = load_lexicon(full_demo.lexicon_path)
    sentences = segment_sentences(full_demo.corpus_path.read_text())
    pairs = generate_pairs(
        lexicon, "high", 1000, sentences, seed=0,
        contexts_per_word=5, anti_per_word=5,
    )
    assert len(pairs) == 1000

    accuracies = {}
    for scheme in ("char", "bpe"):
        config = preset_config(f"small-{scheme}")
        if scheme == "char":
            tokenizer = Tokenizer(build_char_vocab())
        else:
            vocab, table = train_bpe(docs, config.vocab_size)
            assert len(vocab) == 8002
            tokenizer = Tokenizer(vocab, table)
        n_tokens = sum(len(tokenizer.encode(d)) + 1 for d in docs)
        steps = max(100, n_tokens // (32 * 128))
        plan = TrainPlan(total_steps=steps, seed=0, log_every=200)
        result = train(config, tokenizer, docs, plan, tmp_path / f"run-{scheme}")
        step = plan.checkpoint_steps[-1]
        _, ck_config, params, _ = load_checkpoint(result.checkpoint_dirs[step])
        scorer = Scorer(params, ck_config, tokenizer, batch_size=32)
        records = evaluate_pair_protocols(
            scorer, pairs, step, ("lexdec", "surprisal"), max_contexts=5
        )
        for r in records:
            accuracies[(scheme, r.protocol)] = r.accuracy

    lex_gap = 100 * (accuracies[("char", "lexdec")] - accuracies[("bpe", "lexdec")])
    sur_gap = 100 * abs(
        accuracies[("char", "surprisal")] - accuracies[("bpe", "surprisal")]
    )
    ok = lex_gap >= 10.0 and sur_gap <= 15.0
    report(
        5,
        ok,
        "high-band accuracies "
        f"char lexdec {100*accuracies[('char','lexdec')]:.1f} vs "
        f"bpe lexdec {100*accuracies[('bpe','lexdec')]:.1f} "
        f"(gap {lex_gap:+.1f}, need >= +10); "
        f"char surprisal {100*accuracies[('char','surprisal')]:.1f} vs "
        f"bpe surprisal {100*accuracies[('bpe','surprisal')]:.1f} "
        f"(|gap| {sur_gap:.1f}, need <= 15)",
    )


def test_criterion_06_checkpoint_schedule():
    ok = True
    details = []
    for total in (100, 1000, 123_456):
        steps = checkpoint_schedule(total)
        distinct_ok = steps == sorted(set(steps))
        count_ok = len(steps) == 19 if total > 100 else len(steps) >= 15
        last_ok = steps[-1] == total
        early_ok = len([s for s in steps if s <= total / 10]) == len(steps) - 9
        ok = ok and distinct_ok and count_ok and last_ok and early_ok
        details.append(f"T={total}: {len(steps)} pts, last={steps[-1]}")
    report(6, ok, "; ".join(details))


@pytest.mark.slow
def test_criterion_07_stimulus_invariants(full_demo, tmp_path):
    lexicon = load_lexicon(full_demo.lexicon_path)
    lexicon_words = {e.word.lower() for e in lexicon}
    sentences = segment_sentences(full_demo.corpus_path.read_text())
    pairs = generate_pairs(
        lexicon, "high", 1000, sentences, seed=123,
        contexts_per_word=3, anti_per_word=3,
    )
    n = len(pairs)
    vocab = build_char_vocab()
    from lexilab.tokenizers import encode

    equal_len = sum(len(p.word) == len(p.nonword) for p in pairs)
    equal_tokens = sum(
        len(encode(vocab, p.word)) == len(encode(vocab, p.nonword)) for p in pairs
    )
    in_lexicon = sum(p.nonword in lexicon_words for p in pairs)
    syl_ok = 0
    for p in pairs:
        sw, sn = syllabify(p.word), syllabify(p.nonword)
        if len(sw) == len(sn) and sum(a != b for a, b in zip(sw, sn)) <= 2:
            syl_ok += 1

    a_path, b_path = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_stimuli(a_path, pairs)
    write_stimuli(
        b_path,
        generate_pairs(
            lexicon, "high", 1000, sentences, seed=123,
            contexts_per_word=3, anti_per_word=3,
        ),
    )
    identical = a_path.read_bytes() == b_path.read_bytes()

    ok = (
        n == 1000
        and equal_len == n
        and equal_tokens == n
        and in_lexicon == 0
        and syl_ok == n
        and identical
    )
    report(
        7,
        ok,
        f"{n} pairs: equal length {equal_len}/{n}, equal char tokens "
        f"{equal_tokens}/{n}, lexicon hits {in_lexicon}, syllable rule "
        f"{syl_ok}/{n}, regeneration byte-identical: {identical}",
    )


def test_criterion_08_spearman_oracle():
    rng = np.random.default_rng(42)
    worst = 0.0
    checked = 0
    for _ in range(1000):
        xs = rng.integers(0, 10, size=19).astype(float)  # injected ties
        ys = rng.normal(size=19)
        ys[rng.integers(0, 19)] = ys[int(rng.integers(0, 19))]
        ours = spearman(xs, ys)
        ref = spearman_bruteforce(xs, ys)
        if ours is None:
            assert np.isnan(ref)
            continue
        worst = max(worst, abs(ours - ref))
        checked += 1
    endpoints = (
        spearman([1, 2, 3, 4], [1, 4, 9, 16]) == pytest.approx(1.0)
        and spearman([1, 2, 3, 4], [0, -1, -2, -3]) == pytest.approx(-1.0)
    )
    ok = worst < 1e-12 and endpoints and checked > 900
    report(
        8,
        ok,
        f"{checked} random tied vectors, max |ours - bruteforce| = {worst:.2e} "
        f"(bound 1e-12); monotone endpoints at +/-1: {endpoints}",
    )


def test_criterion_09_quintic_fit_oracle():
    planted = np.array([0.2, -0.9, 0.4, 0.05, -0.015, 0.002])
    steps = np.unique(np.logspace(0.2, 4.2, 19).astype(int)).astype(float)
    ys = evaluate_fit(planted, steps)
    coeffs, residual = polyfit_quintic(list(zip(steps, ys)))
    recovered = bool(np.allclose(coeffs, planted, atol=1e-6))

    const_pts = [(float(s), 0.42) for s in [10, 30, 90, 270, 810, 2430, 7290]]
    c_coeffs, c_resid = polyfit_quintic(const_pts)
    const_ok = (
        c_resid < 1e-8
        and abs(c_coeffs[0] - 0.42) < 1e-8
        and bool(np.all(np.abs(c_coeffs[1:]) < 1e-8))
    )
    ok = residual < 1e-8 and recovered and const_ok
    report(
        9,
        ok,
        f"planted-coefficient recovery residual {residual:.2e} (bound 1e-8), "
        f"coefficients recovered: {recovered}; constant-data degeneracy ok: {const_ok}",
    )


@pytest.mark.slow
def test_criterion_10_pipeline_determinism(tiny_demo, tmp_path):
    import json

    suite_path = tmp_path / "suite.jsonl"
    rows = [
        {"sentence_good": "The dog is small.", "sentence_bad": "Dog the small is.",
         "phenomenon": "order"},
        {"sentence_good": "She walks home.", "sentence_bad": "She walk home.",
         "phenomenon": "agreement"},
        {"sentence_good": "We saw a bird.", "sentence_bad": "We saw bird a.",
         "phenomenon": "order"},
    ]
    suite_path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")

    outputs = {}
    for label in ("first", "second"):
        cfg = ExperimentConfig(
            corpus=str(tiny_demo.corpus_path),
            lexicon=str(tiny_demo.lexicon_path),
            preset="small-char",
            seed=21,
            out_root=str(tmp_path / label),
            suite=str(suite_path),
            stimuli_band="high",
            stimuli_n=6,
            contexts_per_word=2,
            trainer={"total_steps": 100, "batch_size": 4, "context": 64},
        )
        run = run_pipeline(cfg)
        outputs[label] = {
            "results.csv": (run.root / "results.csv").read_bytes(),
            "correlations.csv": (run.root / "report" / "correlations.csv").read_bytes(),
            "deltas.csv": (run.root / "report" / "deltas.csv").read_bytes(),
        }
    same = {k: outputs["first"][k] == outputs["second"][k] for k in outputs["first"]}
    report(
        10,
        all(same.values()),
        f"two pipeline runs, identical files: {same}",
    )
