"""Attention LSTM decoder with the multiple-pointer-generator output.

Parameters are shared across passages; every passage k keeps its own LSTM
state and contexts, and the K gated mixtures are averaged into V_final.
"""
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from config.errors import DimensionError
from model.encoder import Mpm
from model.lstm import lstm_step
from model.memory import Um
from model.params import DecoderParams, LstmCellParams
from numerics import NdArray, ops
from vocab import EmbeddingTable


@dataclass
class DecoderState:
    hc: NdArray  # [K x 2S] hidden and cell per passage
    context: NdArray  # c^k, [K x |u|]
    question_context: NdArray  # c^{q,k}, [K x |h^q|]
    prev_token: int

    @property
    def num_passages(self) -> int:
        return self.hc.shape[0]

    @property
    def hidden(self) -> NdArray:
        return self.hc[:, : self.hc.shape[1] // 2]

    def feed(self, token: int) -> "DecoderState":
        return replace(self, prev_token=int(token))


@dataclass
class SourceMemory:
    """Everything the decoder reads at each step for one example."""
    passages: Um
    question: Mpm
    passage_ext: np.ndarray  # [K x Np]
    question_ext: np.ndarray  # [Nq]
    extended_size: int

    @property
    def num_passages(self) -> int:
        return self.passages.hidden.shape[0]


@dataclass
class StepOutput:
    alpha: NdArray  # [K x Np]
    alpha_q: NdArray  # [K x Nq]
    vocab: NdArray  # V^k_vocab [K x E]
    passage_copy: NdArray  # P^k_attn [K x E]
    question_copy: NdArray  # Q^k_attn [K x E]
    gates: NdArray  # [K x 3]
    final: NdArray  # V_final [E]


def initial_state(memory: SourceMemory, hidden_size: int, bos_id: int) -> DecoderState:
    K = memory.num_passages
    return DecoderState(
        hc=NdArray(np.zeros((K, 2 * hidden_size))),
        context=NdArray(np.zeros((K, memory.passages.hidden.shape[-1]))),
        question_context=NdArray(np.zeros((K, memory.question.hidden.shape[-1]))),
        prev_token=bos_id,
    )


def step_state(state: DecoderState, prev_embedding: NdArray, cell: LstmCellParams) -> NdArray:
    """s^k_t = LSTM(s^k_{t-1}, [a_{t-1}, c^k_{t-1}, c^{q,k}_{t-1}]) for every k; returns [K x 2S]."""
    K = state.num_passages
    a = ops.add(NdArray(np.zeros((K, 1))), ops.reshape(prev_embedding, (1, -1)))
    x = ops.concat([a, state.context, state.question_context], axis=-1)
    if x.shape[-1] != cell.input_size:
        raise DimensionError("step_state", x.shape, cell.W.shape)
    xp = ops.add(ops.matmul(x, cell.W), cell.b)
    return lstm_step(xp, state.hc, cell.U)


def attend(
    s: NdArray, memory: NdArray, mask: np.ndarray, w_h: NdArray, w_s: NdArray, b_e: NdArray
) -> Tuple[NdArray, NdArray]:
    """e_i = tanh(w_h . mem_i + w_s . s + b_e); alpha = masked softmax; context = sum_i alpha_i mem_i.

    ``s`` is [K x S]; ``memory`` is [K x N x W] or one [N x W] shared by all k.
    """
    if memory.shape[-1] != w_h.shape[0] or s.shape[-1] != w_s.shape[0]:
        raise DimensionError("attend", memory.shape, s.shape)
    energies = ops.tanh(ops.add(ops.add(ops.matmul(memory, w_h), ops.expand_dims(ops.matmul(s, w_s), -1)), b_e))
    alpha = ops.masked_softmax(energies, mask)
    context = ops.matmul(ops.expand_dims(alpha, -2), memory)
    return alpha, ops.reshape(context, alpha.shape[:-1] + (memory.shape[-1],))


def features(s: NdArray, context: NdArray, question_context: NdArray) -> NdArray:
    return ops.concat([s, context, question_context], axis=-1)


def vocab_dist(feats: NdArray, W_out: NdArray, b_v: NdArray, extended_size: int) -> NdArray:
    """Softmax over the decoder vocabulary, zero-padded out to the extended size."""
    if feats.shape[-1] != W_out.shape[1]:
        raise DimensionError("vocab_dist", feats.shape, W_out.shape)
    probs = ops.softmax(ops.add(ops.matmul(feats, ops.transpose(W_out)), b_v))
    extra = extended_size - W_out.shape[0]
    if extra <= 0:
        return probs
    return ops.concat([probs, NdArray(np.zeros(probs.shape[:-1] + (extra,)))], axis=-1)


def copy_dists(
    alpha: NdArray, alpha_q: NdArray, passage_ext: np.ndarray, question_ext: np.ndarray, extended_size: int
) -> Tuple[NdArray, NdArray]:
    """Scatter attention mass onto the (extended) id of each source token."""
    P = ops.scatter_add(alpha, passage_ext, extended_size)
    q_index = np.broadcast_to(np.asarray(question_ext), alpha_q.shape)
    Q = ops.scatter_add(alpha_q, q_index, extended_size)
    return P, Q


def gates_and_final(
    feats: NdArray, V: NdArray, P: NdArray, Q: NdArray, W_g: NdArray, b_g: NdArray
) -> Tuple[NdArray, NdArray]:
    """Per-passage gate softmax and V_final = (1/K) sum_k (g_v V^k + g_a P^k + g_q Q^k).

    Every per-passage quantity is computed row by row and summed in sorted
    order, so V_final does not depend on the order of the passages.
    """
    K = feats.shape[0]
    logits = ops.add(ops.sum(ops.mul(ops.expand_dims(feats, -2), W_g), axis=-1), b_g)
    gates = ops.softmax(logits)
    mix = ops.add(
        ops.add(ops.mul(gates[:, 0:1], V), ops.mul(gates[:, 1:2], P)),
        ops.mul(gates[:, 2:3], Q),
    )
    return gates, ops.mul(ops.sorted_sum(mix, axis=0), 1.0 / K)


def decode_step(
    params: DecoderParams, embedding: EmbeddingTable, memory: SourceMemory, state: DecoderState
) -> Tuple[StepOutput, DecoderState]:
    """Feed ``state.prev_token`` and produce V_final.

    The returned state still names the token just fed; callers pick the next
    token and advance it with ``DecoderState.feed``.
    """
    prev_embedding = embedding.lookup(np.array([state.prev_token]))[0]
    hc = step_state(state, prev_embedding, params.cell)
    S = params.cell.hidden_size
    s = hc[:, :S]
    alpha, context = attend(s, memory.passages.hidden, memory.passages.mask, params.w_h, params.w_s, params.b_e)
    alpha_q, q_context = attend(
        s, memory.question.hidden, memory.question.mask, params.w_h_q, params.w_s_q, params.b_e_q
    )
    feats = features(s, context, q_context)
    V = vocab_dist(feats, params.W_out, params.b_v, memory.extended_size)
    P, Q = copy_dists(alpha, alpha_q, memory.passage_ext, memory.question_ext, memory.extended_size)
    gates, final = gates_and_final(feats, V, P, Q, params.W_g, params.b_g)
    out = StepOutput(alpha, alpha_q, V, P, Q, gates, final)
    return out, DecoderState(hc, context, q_context, state.prev_token)
