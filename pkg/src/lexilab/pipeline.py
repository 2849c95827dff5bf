"""Experiment pipeline: tokenizer -> train -> stimuli -> eval -> analyze.

Each stage records sha256 hashes of its inputs and outputs in
``pipeline_manifest.json``.  A stage is skipped when its outputs exist with
matching hashes, its inputs are unchanged, and no upstream stage re-ran
this invocation; otherwise it executes and everything downstream follows.
Any stage failure halts the pipeline with the stage name; completed stages
keep their outputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .config import ExperimentConfig, preset_config
from .evaluation import evaluate_run, load_suite, read_results, write_results
from .stimuli import generate_pairs, load_lexicon, read_stimuli, segment_sentences, write_stimuli
from .tokenizers import Tokenizer, build_char_vocab, load_tokenizer, save_tokenizer, train_bpe
from .trainer import TrainPlan, train

MANIFEST_NAME = "pipeline_manifest.json"
STAGES = ("tokenizer", "train", "stimuli", "eval", "analyze")


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


def file_hash(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _hash_paths(paths: list[Path]) -> dict[str, str]:
    return {str(p): file_hash(p) for p in sorted(paths) if p.exists()}


@dataclass
class _Stage:
    name: str
    inputs: list[Path]
    outputs: list[Path]
    config_key: str  # stage-relevant config serialization

    def fingerprint(self) -> dict:
        return {
            "inputs": _hash_paths(self.inputs),
            "outputs": _hash_paths(self.outputs),
            "config": self.config_key,
        }


class PipelineRun:
    def __init__(self, cfg: ExperimentConfig, echo=None):
        self.cfg = cfg
        self.echo = echo or (lambda *_: None)
        self.root = Path(cfg.out_root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.manifest_path = self.root / MANIFEST_NAME
        self.manifest = {}
        if self.manifest_path.exists():
            self.manifest = json.loads(self.manifest_path.read_text())
        self.ran: list[str] = []
        self.skipped: list[str] = []

        self.scheme = cfg.preset.split("-")[-1]  # preset_config validates fully
        self.tokenizer_path = self.root / "tokenizer.json"
        self.run_dir = self.root / "run"
        self.stimuli_path = (
            Path(cfg.stimuli) if cfg.stimuli else self.root / "stimuli.jsonl"
        )
        self.results_path = self.root / "results.csv"
        self.blimp_path = self.root / "blimp.csv"
        self.perplexity_path = self.root / "perplexity.csv"
        self.report_dir = self.root / "report"

    # ---- stage plumbing ----

    def _should_run(self, stage: _Stage, upstream_ran: bool) -> bool:
        if upstream_ran:
            return True
        recorded = self.manifest.get(stage.name)
        if recorded is None:
            return True
        current = stage.fingerprint()
        if recorded["config"] != current["config"]:
            return True
        if recorded["inputs"] != current["inputs"]:
            return True
        if not stage.outputs or not all(p.exists() for p in stage.outputs):
            return True
        if recorded["outputs"] != current["outputs"]:
            return True
        return False

    def _execute(self, stage: _Stage, action, upstream_ran: bool) -> bool:
        if not self._should_run(stage, upstream_ran):
            self.skipped.append(stage.name)
            self.echo(f"[{stage.name}] up to date, skipping")
            return False
        self.echo(f"[{stage.name}] running")
        try:
            action()
        except Exception as exc:  # halt with the stage name, keep prior stages
            self._save_manifest()
            raise StageError(stage.name, exc) from exc
        self.manifest[stage.name] = stage.fingerprint()
        self._save_manifest()
        self.ran.append(stage.name)
        return True

    def _save_manifest(self) -> None:
        from . import __version__

        self.manifest["tool_version"] = __version__
        self.manifest_path.write_text(
            json.dumps(self.manifest, indent=2, sort_keys=True), encoding="utf-8"
        )

    # ---- stages ----

    def run(self) -> Path:
        cfg = self.cfg
        cfg.save(self.root / "config.json")
        corpus = Path(cfg.corpus)
        model_config = preset_config(cfg.preset)

        tok_stage = _Stage(
            "tokenizer",
            inputs=[corpus],
            outputs=[self.tokenizer_path],
            config_key=json.dumps({"scheme": self.scheme, "vocab": model_config.vocab_size}),
        )
        ran = self._execute(tok_stage, self._stage_tokenizer, upstream_ran=False)

        plan = self._plan()
        train_outputs = [self.run_dir / "loss_log.csv"]
        train_stage = _Stage(
            "train",
            inputs=[corpus, self.tokenizer_path],
            outputs=train_outputs,
            config_key=json.dumps(
                {"preset": cfg.preset, "plan": _plan_key(plan)}, sort_keys=True
            ),
        )
        ran = self._execute(train_stage, self._stage_train, upstream_ran=ran) or ran

        stimuli_inputs = [corpus]
        if cfg.lexicon:
            stimuli_inputs.append(Path(cfg.lexicon))
        stim_stage = _Stage(
            "stimuli",
            inputs=stimuli_inputs,
            outputs=[self.stimuli_path],
            config_key=json.dumps(
                {
                    "band": cfg.stimuli_band,
                    "n": cfg.stimuli_n,
                    "seed": cfg.seed,
                    "contexts": cfg.contexts_per_word,
                    "external": bool(cfg.stimuli),
                },
                sort_keys=True,
            ),
        )
        if cfg.stimuli:
            self.echo("[stimuli] using externally supplied file")
            stim_ran = False
        else:
            # stimulus generation has no dependency on training
            stim_ran = self._execute(stim_stage, self._stage_stimuli, upstream_ran=False)

        eval_outputs = [self.results_path]
        if cfg.suite:
            eval_outputs.append(self.blimp_path)
        if cfg.held_out:
            eval_outputs.append(self.perplexity_path)
        eval_inputs = [self.stimuli_path, self.run_dir / "loss_log.csv"]
        if cfg.suite:
            eval_inputs.append(Path(cfg.suite))
        if cfg.held_out:
            eval_inputs.append(Path(cfg.held_out))
        eval_stage = _Stage(
            "eval",
            inputs=eval_inputs,
            outputs=eval_outputs,
            config_key=json.dumps({"protocols": "lexdec,surprisal,anti"}),
        )
        ran_eval = self._execute(
            eval_stage, self._stage_eval, upstream_ran=ran or stim_ran
        )

        analyze_inputs = [self.results_path]
        if cfg.suite:
            analyze_inputs.append(self.blimp_path)
        analyze_stage = _Stage(
            "analyze",
            inputs=analyze_inputs,
            outputs=[
                self.report_dir / "curves.csv",
                self.report_dir / "correlations.csv",
                self.report_dir / "deltas.csv",
            ],
            config_key=json.dumps({"x_mode": "log-step"}),
        )
        self._execute(analyze_stage, self._stage_analyze, upstream_ran=ran_eval)
        return self.root

    def _plan(self) -> TrainPlan:
        cfg = self.cfg
        overrides = dict(cfg.trainer)
        if "total_steps" not in overrides:
            overrides["total_steps"] = self._default_steps()
        overrides.setdefault("seed", cfg.seed)
        return TrainPlan(**overrides)

    def _default_steps(self) -> int:
        # one pass over the corpus with the default batch geometry
        tokenizer = self._tokenizer()
        text = Path(self.cfg.corpus).read_text(encoding="utf-8")
        docs = [l for l in text.splitlines() if l]
        n_tokens = sum(len(tokenizer.encode(d)) + 1 for d in docs)
        batch = dict(self.cfg.trainer).get("batch_size", 32)
        context = dict(self.cfg.trainer).get("context", 128)
        return max(100, n_tokens // (batch * context))

    def _tokenizer(self) -> Tokenizer:
        return load_tokenizer(self.tokenizer_path)

    def _corpus_lines(self) -> list[str]:
        return [
            l
            for l in Path(self.cfg.corpus).read_text(encoding="utf-8").splitlines()
            if l
        ]

    def _stage_tokenizer(self) -> None:
        model_config = preset_config(self.cfg.preset)
        if self.scheme == "char":
            save_tokenizer(self.tokenizer_path, build_char_vocab())
        else:
            vocab, table = train_bpe(self._corpus_lines(), model_config.vocab_size)
            save_tokenizer(self.tokenizer_path, vocab, table)

    def _stage_train(self) -> None:
        tokenizer = self._tokenizer()
        config = preset_config(self.cfg.preset)
        train(config, tokenizer, self._corpus_lines(), self._plan(), self.run_dir)

    def _stage_stimuli(self) -> None:
        cfg = self.cfg
        if not cfg.lexicon:
            raise ValueError("stimulus generation requires a lexicon path")
        lexicon = load_lexicon(cfg.lexicon)
        sentences = segment_sentences(
            Path(cfg.corpus).read_text(encoding="utf-8")
        )
        bands = ["high", "low"] if cfg.stimuli_band == "both" else [cfg.stimuli_band]
        pairs = []
        for band in bands:
            pairs.extend(
                generate_pairs(
                    lexicon,
                    band,
                    cfg.stimuli_n,
                    sentences,
                    seed=cfg.seed,
                    contexts_per_word=cfg.contexts_per_word,
                    anti_per_word=cfg.contexts_per_word,
                )
            )
        write_stimuli(self.stimuli_path, pairs)

    def _stage_eval(self) -> None:
        cfg = self.cfg
        tokenizer = self._tokenizer()
        pairs = read_stimuli(self.stimuli_path)
        suite_items = None
        if cfg.suite:
            suite_items, _ = load_suite(cfg.suite)
        lexical, syntactic = evaluate_run(
            self.run_dir,
            tokenizer,
            pairs=pairs,
            suite_items=suite_items,
            checkpoints="all",
            echo=self.echo,
        )
        write_results(self.results_path, lexical)
        if cfg.suite:
            write_results(self.blimp_path, syntactic)
        if cfg.held_out:
            self._write_perplexities(tokenizer)

    def _write_perplexities(self, tokenizer: Tokenizer) -> None:
        import csv

        from .evaluation import list_checkpoints
        from .model import load_checkpoint
        from .trainer import perplexity

        held = [
            l
            for l in Path(self.cfg.held_out).read_text(encoding="utf-8").splitlines()
            if l
        ]
        with open(self.perplexity_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "perplexity"])
            for step, ck_dir in list_checkpoints(self.run_dir):
                _, config, params, _ = load_checkpoint(ck_dir)
                writer.writerow(
                    [step, f"{perplexity(params, config, tokenizer, held):.6f}"]
                )

    def _stage_analyze(self) -> None:
        from .analysis import analyze

        lexical = read_results(self.results_path)
        blimp = read_results(self.blimp_path) if self.blimp_path.exists() else []
        analyze(lexical, blimp, self.report_dir)


def run_pipeline(cfg: ExperimentConfig, echo=None) -> PipelineRun:
    run = PipelineRun(cfg, echo=echo)
    run.run()
    return run


def _plan_key(plan: TrainPlan) -> dict:
    doc = {k: v for k, v in vars(plan).items()}
    doc["checkpoint_steps"] = list(plan.checkpoint_steps)
    return doc


def validate_inputs(cfg: ExperimentConfig) -> dict:
    """Check corpus encodability, lexicon format, and suite format.
    Returns {'problems': [...], 'warnings': [...], 'counts': {...}}."""
    from .stimuli import stratify
    from .tokenizers import PRINTABLE_CHARS

    problems: list[str] = []
    warnings_: list[str] = []
    counts: dict[str, int] = {}

    corpus = Path(cfg.corpus)
    if not corpus.exists():
        problems.append(f"corpus not found: {corpus}")
    else:
        printable = set(PRINTABLE_CHARS)
        n_words = 0
        bad_chars = 0
        for lineno, line in enumerate(
            corpus.read_text(encoding="utf-8", errors="replace").splitlines(), 1
        ):
            n_words += len(line.split())
            for offset, ch in enumerate(line):
                if ch not in printable:
                    bad_chars += 1
                    if bad_chars <= 5:
                        problems.append(
                            f"corpus {corpus}:{lineno}: non-printable character "
                            f"{ch!r} at offset {offset}"
                        )
        if bad_chars > 5:
            problems.append(f"... {bad_chars} non-printable characters in total")
        counts["corpus_words"] = n_words

    if cfg.lexicon:
        try:
            entries = load_lexicon(cfg.lexicon)
            high, low = stratify(entries)
            counts["lexicon_entries"] = len(entries)
            counts["lexicon_high_band"] = len(high)
            counts["lexicon_low_band"] = len(low)
            if not high:
                warnings_.append("high-frequency band is empty")
            if not low:
                warnings_.append("low-frequency band is empty")
        except (OSError, ValueError) as exc:
            problems.append(f"lexicon: {exc}")

    if cfg.suite:
        try:
            items, skipped = load_suite(cfg.suite)
            counts["suite_pairs"] = len(items)
            if skipped:
                warnings_.append(f"suite: {skipped} malformed records skipped")
            if not items:
                problems.append("suite contains no valid records")
        except OSError as exc:
            problems.append(f"suite: {exc}")

    if cfg.stimuli:
        try:
            counts["stimulus_pairs"] = len(read_stimuli(cfg.stimuli))
        except (OSError, ValueError, KeyError) as exc:
            problems.append(f"stimuli: {exc}")

    return {"problems": problems, "warnings": warnings_, "counts": counts}
