"""Frequency-capped vocabulary with fixed special ids."""
from collections import Counter
from typing import Iterable, List, Sequence

import numpy as np
from loguru import logger

from config.errors import ConfigError, DegenerateInputError, ValidationError

PAD, UNK, BOS, EOS = "<pad>", "<unk>", "<s>", "</s>"
SPECIALS = (PAD, UNK, BOS, EOS)
PAD_ID, UNK_ID, BOS_ID, EOS_ID = 0, 1, 2, 3


class Vocabulary:
    """Dense token <-> id association; specials occupy ids 0..3."""

    def __init__(self, tokens: Sequence[str]):
        if tuple(tokens[:4]) != SPECIALS:
            raise ConfigError(f"vocabulary must start with {SPECIALS}")
        self.tokens: List[str] = list(tokens)
        self.index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise ConfigError("vocabulary contains duplicate tokens")

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.tokens == other.tokens

    def encode(self, token: str) -> int:
        return self.index.get(token, UNK_ID)

    def decode(self, idx: int) -> str:
        return self.tokens[idx]

    def encode_seq(self, tokens: Iterable[str]) -> np.ndarray:
        return np.array([self.encode(t) for t in tokens], dtype=np.int64)

    def save(self, path: str) -> None:
        """One token per line; the line number is the id."""
        with open(path, "w", encoding="utf-8") as f:
            for tok in self.tokens:
                f.write(tok + "\n")

    @classmethod
    def load(cls, path: str) -> "Vocabulary":
        with open(path, "r", encoding="utf-8") as f:
            tokens = [line.rstrip("\n") for line in f]
        if any(not t for t in tokens):
            raise ValidationError(f"empty token in vocabulary file {path}")
        return cls(tokens)


def build_vocab(corpus: Iterable[Sequence[str]], max_size: int) -> Vocabulary:
    """Specials plus the (max_size - 4) most frequent tokens, ties broken lexicographically."""
    if max_size < 5:
        raise ConfigError(f"vocabulary max_size must be at least 5, got {max_size}")
    counts: Counter = Counter()
    n_seqs = 0
    for seq in corpus:
        n_seqs += 1
        counts.update(t for t in seq if t not in SPECIALS)
    if n_seqs == 0:
        raise DegenerateInputError("cannot build a vocabulary from an empty corpus")

    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = [tok for tok, _ in ranked[: max_size - len(SPECIALS)]]
    logger.debug(f"Vocabulary: {len(counts)} distinct tokens, keeping {len(kept)}")
    return Vocabulary(list(SPECIALS) + kept)
