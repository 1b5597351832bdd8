"""Negative passage sampling: one passage from another question per positive passage."""
from typing import Dict, List, Optional, Sequence

import numpy as np
from loguru import logger

from config.errors import ConfigError
from data.examples import QAExample
from numerics import SeededRng


class NegativePool:
    """Every passage of a corpus tagged with its question id."""

    def __init__(self, corpus: Sequence[QAExample]):
        passages, owners = [], []
        for ex in corpus:
            for passage in ex.raw_passages:
                passages.append(passage)
                owners.append(ex.id)
        self._fill(passages, owners)

    def _fill(self, passages: List[np.ndarray], owners: List[str]) -> None:
        self.passages: List[np.ndarray] = passages
        self.owners: List[str] = owners
        self.owner_ids = np.array(self.owners, dtype=object)
        if len(set(self.owners)) < 2:
            raise ConfigError("negative sampling needs a corpus with at least two questions")

    @classmethod
    def from_dict(cls, data: Dict[str, list]) -> "NegativePool":
        """Rebuild a pool saved by ``to_dict``."""
        pool = cls.__new__(cls)
        pool._fill([np.asarray(p, dtype=np.int64) for p in data["passages"]], [str(o) for o in data["owners"]])
        return pool

    def to_dict(self, limit: Optional[int] = None) -> Dict[str, list]:
        """Base-id passages and owners, the first ``limit`` of them, for a checkpoint header."""
        n = len(self.passages) if limit is None else min(limit, len(self.passages))
        return {
            "owners": list(self.owners[:n]),
            "passages": [[int(i) for i in p] for p in self.passages[:n]],
        }

    def __len__(self) -> int:
        return len(self.passages)

    def eligible(self, qid: str) -> int:
        return int(np.sum(self.owner_ids != qid))

    def draw(self, qid: str, rng: SeededRng) -> int:
        """Index of a passage owned by another question, uniform over all such passages."""
        if self.eligible(qid) == 0:
            raise ConfigError(f"no passage outside question {qid} to sample as a negative")
        while True:
            idx = rng.randint(len(self.passages))
            if self.owners[idx] != qid:
                return idx


def sample_negatives(batch: Sequence[QAExample], corpus, rng: SeededRng) -> List[List[np.ndarray]]:
    """For each example, one negative per positive passage, in passage order.

    ``corpus`` is a list of examples or a prebuilt NegativePool.
    """
    pool = corpus if isinstance(corpus, NegativePool) else NegativePool(corpus)
    out = []
    for ex in batch:
        out.append([pool.passages[pool.draw(ex.id, rng)] for _ in range(ex.num_passages)])
    logger.debug(f"Sampled {sum(len(n) for n in out)} negatives from a pool of {len(pool)}")
    return out
