from .negatives import NegativePool, sample_negatives
from .loss import LossValue, compute_loss, sequence_nll
from .optim import Adam, clip_global_norm
from .checkpoint import Checkpoint, save_checkpoint, load_checkpoint, encode_checkpoint, decode_checkpoint
from .inference import decode_examples, evaluate_model, eval_negatives, trace_rows, write_trace
from .trainer import Trainer, EpochStats, load_model, model_from_checkpoint, saved_pool
from .ablation import apply_ablation, ablation_variants, run_ablation, summarize

__all__ = [
    "NegativePool",
    "sample_negatives",
    "LossValue",
    "compute_loss",
    "sequence_nll",
    "Adam",
    "clip_global_norm",
    "Checkpoint",
    "save_checkpoint",
    "load_checkpoint",
    "encode_checkpoint",
    "decode_checkpoint",
    "decode_examples",
    "evaluate_model",
    "eval_negatives",
    "trace_rows",
    "write_trace",
    "Trainer",
    "EpochStats",
    "load_model",
    "model_from_checkpoint",
    "saved_pool",
    "apply_ablation",
    "ablation_variants",
    "run_ablation",
    "summarize",
]
