"""Model-ready examples: id arrays, padding masks and the per-example extended vocabulary."""
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config.errors import DegenerateInputError
from data.dataset import TokenizedRecord
from vocab import EOS_ID, PAD_ID, UNK_ID, ExtendedVocabMap, Vocabulary, map_extended


def pad_sequences(seqs: Sequence[np.ndarray], length: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Right-pad int sequences with PAD; returns (ids [B x T], mask [B x T])."""
    if len(seqs) == 0:
        raise DegenerateInputError("nothing to pad")
    if length is None:
        length = max(len(s) for s in seqs)
    ids = np.full((len(seqs), length), PAD_ID, dtype=np.int64)
    mask = np.zeros((len(seqs), length), dtype=bool)
    for i, s in enumerate(seqs):
        n = min(len(s), length)
        ids[i, :n] = s[:n]
        mask[i, :n] = True
    return ids, mask


@dataclass
class QAExample:
    id: str
    question_tokens: List[str]
    passage_tokens: List[List[str]]
    answer_tokens: List[str]
    ext_map: ExtendedVocabMap
    question_ids: np.ndarray  # [Nq] base ids
    passage_ids: np.ndarray  # [K x Np] base ids, PAD-filled
    passage_mask: np.ndarray  # [K x Np]
    question_ext: np.ndarray  # [Nq] base or extended ids
    passage_ext: np.ndarray  # [K x Np]
    target_ids: np.ndarray  # answer ids followed by EOS
    raw_passages: List[np.ndarray] = field(repr=False, default_factory=list)

    @property
    def num_passages(self) -> int:
        return self.passage_ids.shape[0]

    @property
    def extended_size(self) -> int:
        return self.ext_map.size

    def decode(self, ids: Sequence[int], vocab: Vocabulary) -> List[str]:
        return [self.ext_map.token_of(int(i), vocab) for i in ids]


@dataclass
class Batch:
    examples: List[QAExample]
    negatives: List[Optional[List[np.ndarray]]]

    def __len__(self) -> int:
        return len(self.examples)


def target_id(token: str, vocab: Vocabulary, ext_map: ExtendedVocabMap, decoder_vocab_size: int, source: set) -> int:
    """Gold id for an answer token.

    Source tokens are always reachable through copying. Otherwise the token needs
    an id inside the decoder's generation vocabulary, else it becomes UNK.
    """
    idx = ext_map.id_of(token, vocab)
    if token in source or idx < decoder_vocab_size:
        return idx
    return UNK_ID


def build_example(record: TokenizedRecord, vocab: Vocabulary, decoder_vocab_size: Optional[int] = None) -> QAExample:
    if not record.passages:
        raise DegenerateInputError(f"example {record.id} has no passages")
    vd = len(vocab) if decoder_vocab_size is None else min(decoder_vocab_size, len(vocab))

    ext_map, passage_ext, question_ext = map_extended(record.question, record.passages, vocab)
    raw_passages = [vocab.encode_seq(p) for p in record.passages]
    passage_ids, passage_mask = pad_sequences(raw_passages)
    passage_ext_padded, _ = pad_sequences(passage_ext, passage_ids.shape[1])

    source = set(record.question)
    for p in record.passages:
        source.update(p)
    targets = [target_id(t, vocab, ext_map, vd, source) for t in record.answer] + [EOS_ID]

    return QAExample(
        id=record.id,
        question_tokens=list(record.question),
        passage_tokens=[list(p) for p in record.passages],
        answer_tokens=list(record.answer),
        ext_map=ext_map,
        question_ids=vocab.encode_seq(record.question),
        passage_ids=passage_ids,
        passage_mask=passage_mask,
        question_ext=question_ext,
        passage_ext=passage_ext_padded,
        target_ids=np.array(targets, dtype=np.int64),
        raw_passages=raw_passages,
    )


def build_examples(records: Sequence[TokenizedRecord], vocab: Vocabulary, decoder_vocab_size: Optional[int] = None) -> List[QAExample]:
    return [build_example(r, vocab, decoder_vocab_size) for r in records]


def vocab_corpus(records: Sequence[TokenizedRecord]):
    """Every token sequence of a training set, for vocabulary building."""
    for r in records:
        yield r.question
        for p in r.passages:
            yield p
        yield r.answer
