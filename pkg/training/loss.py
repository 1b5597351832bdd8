"""Teacher-forced negative log-likelihood of the gold answer."""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from config.errors import DegenerateInputError
from data.examples import QAExample
from model.gummp import GumMp
from numerics import NdArray, ops


@dataclass
class LossValue:
    total: NdArray  # scalar -sum_t log V_final[a_t]
    token_log_probs: np.ndarray

    @property
    def value(self) -> float:
        return self.total.item()


def sequence_nll(distributions: Sequence[NdArray], targets: Sequence[int]) -> LossValue:
    """-sum_t log(max(p_t[a_t], 1e-12)) over one distribution per target token."""
    if len(distributions) != len(targets) or len(targets) == 0:
        raise DegenerateInputError(f"{len(distributions)} distributions for {len(targets)} targets")
    logs = [ops.clamp_log(p[int(a)]) for p, a in zip(distributions, targets)]
    stacked = ops.stack(logs)
    return LossValue(ops.neg(ops.sum(stacked)), stacked.data.copy())


def compute_loss(model: GumMp, example: QAExample, negatives: Optional[Sequence[np.ndarray]] = None) -> LossValue:
    if not example.answer_tokens:
        raise DegenerateInputError(f"example {example.id} has an empty answer")
    memory = model.encode(example, negatives)
    outputs = model.teacher_forced(memory, example.target_ids)
    return sequence_nll([out.final for out in outputs], example.target_ids)
