"""Training loop: batching, negative resampling, Adam updates, dev evaluation and checkpoints."""
import os
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from config.errors import NumericError, VersionError
from config.schema import TrainConfig
from data.examples import Batch, QAExample
from metrics.scores import EvalReport
from model.gummp import GumMp
from model.params import ModelParams
from numerics import SeededRng, Tape, backward, ops
from training.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from training.inference import eval_negatives, evaluate_model
from training.loss import compute_loss
from training.negatives import NegativePool, sample_negatives
from training.optim import Adam, clip_global_norm
from vocab import Vocabulary

INIT_STREAM = 1
FIXED_NEGATIVES_STREAM = 2
# training passages kept in a checkpoint for inference-time negatives
SAVED_POOL_SIZE = 1024


@dataclass
class EpochStats:
    epoch: int
    loss: float
    dev_bleu1: Optional[float] = None
    dev_rouge_l: Optional[float] = None


def model_from_checkpoint(ckpt: Checkpoint) -> Tuple[GumMp, TrainConfig, Vocabulary]:
    config = TrainConfig.from_dict(ckpt.config)
    vocab = Vocabulary(ckpt.vocab)
    params = ModelParams.from_arrays(config.model_config(len(vocab)), ckpt.params())
    return GumMp(params), config, vocab


def saved_pool(ckpt: Checkpoint) -> Optional[NegativePool]:
    return NegativePool.from_dict(ckpt.negative_pool) if ckpt.negative_pool else None


def load_model(path: str) -> Tuple[GumMp, TrainConfig, Vocabulary]:
    return model_from_checkpoint(load_checkpoint(path))


class Trainer:
    def __init__(
        self,
        config: TrainConfig,
        vocab: Vocabulary,
        train_examples: Sequence[QAExample],
        dev_examples: Optional[Sequence[QAExample]] = None,
        model: Optional[GumMp] = None,
    ):
        self.config = config
        self.vocab = vocab
        self.train_examples = list(train_examples)
        self.dev_examples = list(dev_examples) if dev_examples else []
        self.rng = SeededRng(config.seed)
        self.model = model or GumMp.initialize(config.model_config(len(vocab)), self.rng.fork(INIT_STREAM))
        self.optimizer = Adam(
            self.model.params.tensors,
            lr=config.learning_rate,
            beta1=config.adam_beta1,
            beta2=config.adam_beta2,
            eps=config.adam_eps,
        )
        self.epoch = 0
        self.history: List[float] = []

        self.pool = NegativePool(self.train_examples) if self.model.config.uses_negatives else None
        self.fixed_negatives = None
        self.dev_negatives = None
        if self.dev_examples:
            self.dev_negatives = eval_negatives(
                self.model, self.dev_examples, config.seed, self.dev_examples + self.train_examples
            )

    # ------------------------------------------------------------------
    # Steps
    # ------------------------------------------------------------------

    def train_step(self, batch: Batch) -> float:
        """One Adam update on the mean per-example loss of a batch."""
        params = self.model.params
        params.zero_grad()
        with Tape() as tape:
            losses = [compute_loss(self.model, ex, neg).total for ex, neg in zip(batch.examples, batch.negatives)]
            loss = ops.mul(ops.sum(ops.stack(losses)), 1.0 / len(batch))
        value = loss.item()
        if not np.isfinite(value):
            raise NumericError(
                f"non-finite loss {value} at epoch {self.epoch + 1}",
                {"epoch": self.epoch + 1, "examples": [ex.id for ex in batch.examples],
                 "losses": [float(x.item()) for x in losses]},
            )
        backward(loss, tape)
        norm, scale = clip_global_norm(params.tensors, self.config.clip_norm)
        self.optimizer.step()
        self.model.embedding.zero_pad_row()
        logger.debug(f"batch of {len(batch)}: loss {value:.4f}, grad norm {norm:.3f}, clip {scale:.3f}")
        return value

    def epoch_negatives(self) -> List[Optional[List[np.ndarray]]]:
        if self.pool is None:
            return [None] * len(self.train_examples)
        if self.config.resample_negatives:
            return sample_negatives(self.train_examples, self.pool, self.rng)
        if self.fixed_negatives is None:
            stream = SeededRng(self.config.seed).fork(FIXED_NEGATIVES_STREAM)
            self.fixed_negatives = sample_negatives(self.train_examples, self.pool, stream)
        return self.fixed_negatives

    def run_epoch(self) -> float:
        negatives = self.epoch_negatives()
        order = self.rng.permutation(len(self.train_examples))
        size = self.config.batch_size
        losses = []
        for start in range(0, len(order), size):
            idx = order[start:start + size]
            batch = Batch([self.train_examples[i] for i in idx], [negatives[i] for i in idx])
            losses.append(self.train_step(batch) * len(batch))
        return float(np.sum(losses) / len(order))

    def evaluate(
        self,
        examples: Sequence[QAExample],
        negatives: Optional[Sequence] = None,
        beam_size: Optional[int] = None,
        max_len: Optional[int] = None,
        workers: int = 1,
    ) -> EvalReport:
        if negatives is None:
            negatives = eval_negatives(self.model, examples, self.config.seed)
        return evaluate_model(
            self.model,
            examples,
            self.vocab,
            negatives,
            beam_size=beam_size or self.config.dev_beam_size,
            max_len=max_len or self.config.max_answer_len,
            workers=workers,
        )

    def fit(self, checkpoint_path: Optional[str] = None, epochs: Optional[int] = None) -> List[EpochStats]:
        """Train up to ``epochs`` (default: config.epochs) total epochs, continuing from ``self.epoch``."""
        total = epochs or self.config.epochs
        logger.info(
            f"Training {self.config.ablation} model on {len(self.train_examples)} examples "
            f"for epochs {self.epoch + 1}..{total} ({self.model.params.num_values()} parameters)"
        )
        stats = []
        while self.epoch < total:
            loss = self.run_epoch()
            self.epoch += 1
            self.history.append(loss)
            row = EpochStats(self.epoch, loss)
            message = f"Epoch {self.epoch}/{total}: loss {loss:.4f}"
            if self.dev_examples:
                report = self.evaluate(self.dev_examples, self.dev_negatives)
                row.dev_bleu1, row.dev_rouge_l = report.bleu1, report.rouge_l
                message += f" | dev BLEU-1 {report.bleu1:.4f} ROUGE-L {report.rouge_l:.4f}"
            logger.info(message)
            stats.append(row)
            if checkpoint_path:
                self.save(checkpoint_path)
        return stats

    # ------------------------------------------------------------------
    # Persistence
    # ------------------------------------------------------------------

    def to_checkpoint(self) -> Checkpoint:
        tensors = dict(self.model.params.arrays())
        tensors.update(self.optimizer.state_arrays())
        return Checkpoint(
            config=self.config.to_dict(),
            vocab=list(self.vocab.tokens),
            tensors=tensors,
            epoch=self.epoch,
            rng_state=self.rng.get_state(),
            adam_step=self.optimizer.t,
            history=list(self.history),
            negative_pool=self.pool.to_dict(SAVED_POOL_SIZE) if self.pool is not None else {},
        )

    def save(self, path: str) -> None:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        save_checkpoint(path, self.to_checkpoint())
        self.vocab.save(path + ".vocab")

    @classmethod
    def from_checkpoint(
        cls,
        ckpt: Checkpoint,
        train_examples: Sequence[QAExample],
        dev_examples: Optional[Sequence[QAExample]] = None,
        config: Optional[TrainConfig] = None,
    ) -> "Trainer":
        """Resume: parameters, optimizer moments, RNG state and epoch counter all come back.

        ``config`` may replace the stored one as long as the architecture matches.
        """
        model, stored, vocab = model_from_checkpoint(ckpt)
        if config is not None and config.model_config(len(vocab)) != model.config:
            raise VersionError("config architecture does not match the checkpoint")
        trainer = cls(config or stored, vocab, train_examples, dev_examples, model=model)
        trainer.optimizer.load_state(ckpt.adam_step, ckpt.tensors)
        trainer.rng.set_state(ckpt.rng_state)
        trainer.epoch = ckpt.epoch
        trainer.history = list(ckpt.history)
        logger.info(f"Resumed from epoch {ckpt.epoch}")
        return trainer
