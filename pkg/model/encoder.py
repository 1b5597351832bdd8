"""Question/passage encoding into Multi-Perspective Memories.

Token BiLSTM hiddens are pooled per direction, matched against the other
side's pooled summary through learned perspectives, contrasted with a
negative passage via the matching tensor, smoothed by a second BiLSTM and
concatenated back onto the token hiddens.
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from config.errors import DegenerateInputError, DimensionError
from data.examples import pad_sequences
from model.lstm import run_lstm
from model.params import EncoderParams, LstmCellParams
from numerics import NdArray, ops
from vocab import EmbeddingTable


@dataclass
class PooledSummary:
    forward: NdArray  # [..., D]
    backward: NdArray  # [..., D]

    @property
    def vector(self) -> NdArray:
        return ops.concat([self.forward, self.backward], axis=-1)


@dataclass
class MatchingTensor:
    forward: NdArray  # [..., N, N-, Z]
    backward: NdArray


@dataclass
class Mpm:
    hidden: NdArray  # [..., N, 2(D+Z)]
    mask: np.ndarray  # [..., N]

    @property
    def width(self) -> int:
        return self.hidden.shape[-1]


@dataclass
class EncodedSources:
    passages: Mpm  # H^k for every passage, [K x Np x W]
    question: Mpm  # H^q, [Nq x W]


def bilstm_encode(x: NdArray, mask: np.ndarray, fw: LstmCellParams, bw: LstmCellParams) -> Tuple[NdArray, NdArray]:
    return run_lstm(fw, x, mask), run_lstm(bw, x, mask, reverse=True)


def pool_summary(hf: NdArray, hb: NdArray, mask: np.ndarray) -> PooledSummary:
    return PooledSummary(ops.max_over_time(hf, mask), ops.max_over_time(hb, mask))


def multi_perspective_match(h: NdArray, o: NdArray, W: NdArray) -> NdArray:
    """cos(h * w_z, o * w_z) for every perspective row w_z; [..., D] x [..., D] -> [..., Z]."""
    if h.shape[-1] != W.shape[-1] or o.shape[-1] != W.shape[-1]:
        raise DimensionError("multi_perspective_match", h.shape, o.shape, W.shape)
    return ops.cosine(ops.mul(ops.expand_dims(h, -2), W), ops.mul(ops.expand_dims(o, -2), W))


def matching_tensor(
    pos_f: NdArray, pos_b: NdArray, neg_f: NdArray, neg_b: NdArray, oq: PooledSummary, W: NdArray
) -> MatchingTensor:
    """m[i, j, z] = f_m(pos_i, o^q) - f_m(neg_j, o^q), per direction.

    pos_* are [..., N, D] and neg_* [..., N-, D]; ``oq`` broadcasts against the
    leading axes.
    """
    if neg_f.shape[-2] == 0:
        raise DegenerateInputError("matching_tensor: empty negative passage")

    def _direction(pos, neg, o):
        o = ops.expand_dims(o, -2)
        fp = multi_perspective_match(pos, o, W)  # [..., N, Z]
        fn = multi_perspective_match(neg, o, W)  # [..., N-, Z]
        return ops.sub(ops.expand_dims(fp, -2), ops.expand_dims(fn, -3))

    return MatchingTensor(_direction(pos_f, neg_f, oq.forward), _direction(pos_b, neg_b, oq.backward))


def aggregate_negative(
    M: MatchingTensor,
    o_pos: NdArray,
    o_neg: NdArray,
    w_plus: NdArray,
    w_minus: NdArray,
    w_m: NdArray,
    neg_mask: np.ndarray,
) -> Tuple[NdArray, NdArray]:
    """Attend over negative tokens j for every positive token i; returns m_i per direction [..., N, Z].

    ``o_pos`` / ``o_neg`` are the concatenated 2D-wide summaries of the pair.
    """
    neg_mask = np.asarray(neg_mask, dtype=bool)
    if not np.all(np.any(neg_mask, axis=-1)):
        raise DegenerateInputError("aggregate_negative: every negative token is masked")
    base = ops.add(ops.sum(ops.mul(o_pos, w_plus), axis=-1), ops.sum(ops.mul(o_neg, w_minus), axis=-1))
    base = ops.expand_dims(ops.expand_dims(base, -1), -1)

    def _direction(m):
        energies = ops.tanh(ops.add(base, ops.matmul(m, w_m)))  # [..., N, N-]
        alpha = ops.masked_softmax(energies, neg_mask[..., None, :])
        return ops.sum(ops.mul(ops.expand_dims(alpha, -1), m), axis=-2)

    return _direction(M.forward), _direction(M.backward)


def smooth_and_fuse(
    token_hidden: NdArray, matching: NdArray, fw: LstmCellParams, bw: LstmCellParams, mask: np.ndarray
) -> Mpm:
    """[token hiddens (2D), smoothing BiLSTM over matching vectors (2Z)] per token."""
    if matching.shape[-1] != fw.input_size or matching.shape[:-1] != token_hidden.shape[:-1]:
        raise DimensionError("smooth_and_fuse", token_hidden.shape, matching.shape)
    sf, sb = bilstm_encode(matching, mask, fw, bw)
    return Mpm(ops.concat([token_hidden, sf, sb], axis=-1), np.asarray(mask, dtype=bool))


def _pad_time(x: NdArray, length: int) -> NdArray:
    """Zero-pad axis -2 of x up to ``length``."""
    extra = length - x.shape[-2]
    if extra == 0:
        return x
    pad = np.zeros(x.shape[:-2] + (extra, x.shape[-1]))
    return ops.concat([x, NdArray(pad)], axis=-2)


def encode_sources(
    question_ids: np.ndarray,
    passage_ids: np.ndarray,
    passage_mask: np.ndarray,
    negatives: Optional[Sequence[np.ndarray]],
    embedding: EmbeddingTable,
    params: EncoderParams,
) -> EncodedSources:
    """Build every passage MPM H^k and the question MPM H^q for one example.

    The question, the K passages and their K negatives run through the token
    BiLSTM as one batch. Negatives are ignored unless the params carry the
    matching-tensor weights.
    """
    question_ids = np.asarray(question_ids, dtype=np.int64)
    passage_ids = np.asarray(passage_ids, dtype=np.int64)
    passage_mask = np.asarray(passage_mask, dtype=bool)
    K, Np = passage_ids.shape
    Nq = len(question_ids)
    if K == 0:
        raise DegenerateInputError("encode_sources: no passages")
    if Nq == 0 or Np == 0:
        raise DegenerateInputError("encode_sources: empty question or passage")
    use_neg = params.uses_negatives
    if use_neg:
        if negatives is None or len(negatives) != K:
            raise DegenerateInputError(f"encode_sources: need {K} negative passages")
        if any(len(n) == 0 for n in negatives):
            raise DegenerateInputError("encode_sources: empty negative passage")

    seqs = [question_ids] + list(passage_ids)
    if use_neg:
        seqs += [np.asarray(n, dtype=np.int64) for n in negatives]
    ids, mask = pad_sequences(seqs, max(len(s) for s in seqs))
    mask[1:1 + K, :Np] = passage_mask
    hf, hb = bilstm_encode(embedding.lookup(ids), mask, params.token_fw, params.token_bw)
    summary = pool_summary(hf, hb, mask)

    q_mask = mask[0, :Nq]
    q_f, q_b = hf[0, :Nq], hb[0, :Nq]
    oq = PooledSummary(summary.forward[0], summary.backward[0])
    p_f, p_b = hf[1:1 + K, :Np], hb[1:1 + K, :Np]
    ok = PooledSummary(summary.forward[1:1 + K], summary.backward[1:1 + K])

    # passage side: match passage tokens against the question summary
    if use_neg:
        Nn = max(len(n) for n in negatives)
        n_mask = mask[1 + K:, :Nn]
        on = PooledSummary(summary.forward[1 + K:], summary.backward[1 + K:])
        M = matching_tensor(p_f, p_b, hf[1 + K:, :Nn], hb[1 + K:, :Nn], oq, params.W_p_hat)
        m_f, m_b = aggregate_negative(M, ok.vector, on.vector, params.w_plus, params.w_minus, params.w_m, n_mask)
    else:
        m_f = multi_perspective_match(p_f, oq.forward, params.W_p_hat)
        m_b = multi_perspective_match(p_b, oq.backward, params.W_p_hat)
    passage_matching = ops.concat([m_f, m_b], axis=-1)  # [K x Np x 2Z]

    # question side: roles switched, one matching sequence per passage
    def _question_direction(hq, o_k, o_neg):
        hq = ops.expand_dims(hq, 0)
        score = multi_perspective_match(hq, ops.expand_dims(o_k, -2), params.W_q_hat)
        if o_neg is not None:
            score = ops.sub(score, multi_perspective_match(hq, ops.expand_dims(o_neg, -2), params.W_q_hat))
        return score  # [K x Nq x Z]

    q_matching = ops.concat(
        [
            _question_direction(q_f, ok.forward, on.forward if use_neg else None),
            _question_direction(q_b, ok.backward, on.backward if use_neg else None),
        ],
        axis=-1,
    )

    # one smoothing BiLSTM batch over passage and question matching sequences
    T = max(Np, Nq)
    smooth_in = ops.concat([_pad_time(passage_matching, T), _pad_time(q_matching, T)], axis=0)
    smooth_mask = np.zeros((2 * K, T), dtype=bool)
    smooth_mask[:K, :Np] = passage_mask
    smooth_mask[K:, :Nq] = q_mask
    sf, sb = bilstm_encode(smooth_in, smooth_mask, params.smooth_fw, params.smooth_bw)

    passages = Mpm(ops.concat([p_f, p_b, sf[:K, :Np], sb[:K, :Np]], axis=-1), passage_mask)
    # H^q = mean over k of [h^q, s^{q,k}]; the token part is shared by every k
    s_q = ops.mean(ops.concat([sf[K:, :Nq], sb[K:, :Nq]], axis=-1), axis=0)
    question = Mpm(ops.concat([q_f, q_b, s_q], axis=-1), q_mask)
    return EncodedSources(passages=passages, question=question)


def build_passage_mpm(
    question_ids: np.ndarray,
    passage: np.ndarray,
    negative: Optional[np.ndarray],
    embedding: EmbeddingTable,
    params: EncoderParams,
) -> Mpm:
    """H^k for a single passage."""
    ids, mask = pad_sequences([np.asarray(passage, dtype=np.int64)])
    negatives = None if negative is None else [negative]
    mpm = encode_sources(question_ids, ids, mask, negatives, embedding, params).passages
    return Mpm(mpm.hidden[0], mpm.mask[0])


def build_question_mpm(
    question_ids: np.ndarray,
    passages: Sequence[np.ndarray],
    negatives: Optional[Sequence[np.ndarray]],
    embedding: EmbeddingTable,
    params: EncoderParams,
) -> Mpm:
    """H^q averaged over every passage of the example."""
    if len(passages) == 0:
        raise DegenerateInputError("build_question_mpm: K = 0")
    ids, mask = pad_sequences([np.asarray(p, dtype=np.int64) for p in passages])
    return encode_sources(question_ids, ids, mask, negatives, embedding, params).question
