"""Per-example extended vocabulary for copying out-of-vocabulary source tokens."""
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from vocab.vocabulary import UNK_ID, Vocabulary


@dataclass(frozen=True)
class ExtendedVocabMap:
    base_size: int
    oov_tokens: Tuple[str, ...]

    @property
    def size(self) -> int:
        return self.base_size + len(self.oov_tokens)

    @property
    def mapping(self) -> Dict[str, int]:
        return {tok: self.base_size + i for i, tok in enumerate(self.oov_tokens)}

    def __len__(self) -> int:
        return len(self.oov_tokens)

    def id_of(self, token: str, vocab: Vocabulary) -> int:
        """Base id, else extended id, else UNK."""
        if token in vocab:
            return vocab.encode(token)
        try:
            return self.base_size + self.oov_tokens.index(token)
        except ValueError:
            return UNK_ID

    def token_of(self, idx: int, vocab: Vocabulary) -> str:
        if idx < self.base_size:
            return vocab.decode(idx)
        return self.oov_tokens[idx - self.base_size]


def map_extended(
    question: Sequence[str],
    passages: Sequence[Sequence[str]],
    vocab: Vocabulary,
) -> Tuple[ExtendedVocabMap, List[np.ndarray], np.ndarray]:
    """Assign ids V, V+1, ... to source OOVs in first-occurrence order (passages, then question).

    Returns the map, each passage's extended-or-base ids, and the question's.
    """
    oov: Dict[str, int] = {}
    base = len(vocab)

    def _ids(tokens: Sequence[str]) -> np.ndarray:
        out = []
        for tok in tokens:
            if tok in vocab:
                out.append(vocab.encode(tok))
            else:
                if tok not in oov:
                    oov[tok] = base + len(oov)
                out.append(oov[tok])
        return np.array(out, dtype=np.int64)

    passage_ids = [_ids(p) for p in passages]
    question_ids = _ids(question)
    ordered = tuple(sorted(oov, key=oov.get))
    return ExtendedVocabMap(base_size=base, oov_tokens=ordered), passage_ids, question_ids
