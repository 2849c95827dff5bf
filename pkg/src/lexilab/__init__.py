"""lexilab: train tiny character/BPE decoder LMs and trace word vs. syntax learning."""

from .config import ExperimentConfig, derive_seed, preset_config
from .model import ModelConfig, count_params, forward, init_params, loss_and_grads
from .tokenizers import Tokenizer, build_char_vocab, train_bpe
from .trainer import TrainPlan, checkpoint_schedule, perplexity, train

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig",
    "ModelConfig",
    "Tokenizer",
    "TrainPlan",
    "build_char_vocab",
    "checkpoint_schedule",
    "count_params",
    "derive_seed",
    "forward",
    "init_params",
    "loss_and_grads",
    "perplexity",
    "preset_config",
    "train",
    "train_bpe",
    "__version__",
]
