"""Trainable embedding table with a frozen all-zero PAD row."""
import numpy as np

from config.errors import DimensionError
from numerics import NdArray, ops
from vocab.vocabulary import PAD_ID, UNK_ID


class EmbeddingTable:
    """Wraps the V x D embedding parameter."""

    def __init__(self, weight: NdArray):
        if weight.ndim != 2:
            raise DimensionError("embedding", weight.shape)
        self.weight = weight
        self.zero_pad_row()

    @property
    def vocab_size(self) -> int:
        return self.weight.shape[0]

    @property
    def dim(self) -> int:
        return self.weight.shape[1]

    def lookup(self, ids: np.ndarray) -> NdArray:
        """Embed base ids; extended (copied OOV) ids fall back to UNK."""
        ids = np.asarray(ids, dtype=np.int64)
        ids = np.where(ids < self.vocab_size, ids, UNK_ID)
        return ops.take_rows(self.weight, ids)

    def zero_pad_row(self) -> None:
        self.weight.data[PAD_ID] = 0.0
