import numpy as np
import pytest

from config.errors import DegenerateInputError, DimensionError
from config.schema import ModelConfig
from data.examples import pad_sequences
from model.encoder import (
    MatchingTensor,
    PooledSummary,
    aggregate_negative,
    build_passage_mpm,
    build_question_mpm,
    encode_sources,
    matching_tensor,
    multi_perspective_match,
    pool_summary,
    smooth_and_fuse,
)
from model.lstm import run_lstm
from model.params import LstmCellParams, ModelParams
from numerics import NdArray, SeededRng, grad_check_detail, ops, parameter
from vocab import EmbeddingTable

D, Z = 4, 2


def _params(ablation="full", seed=0):
    config = ModelConfig(
        vocab_size=14, embed_dim=D, perspectives=Z, pam_width=3, k_max=2, n_max=8,
        decoder_hidden=D, decoder_vocab_size=14, ablation=ablation,
    )
    return ModelParams.initialize(config, SeededRng(seed))


def _cos(a, b):
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na < 1e-12 or nb < 1e-12:
        return 0.0
    return float(a @ b / (na * nb))


QUESTION = np.array([4, 5, 6])
PASSAGES = [np.array([7, 8, 9, 5]), np.array([10, 11, 5])]
NEGATIVES = [np.array([12, 13]), np.array([6, 12, 7])]


def _encode(params, passages=PASSAGES, negatives=NEGATIVES, width=None):
    ids, mask = pad_sequences(passages, width)
    return encode_sources(QUESTION, ids, mask, negatives, EmbeddingTable(params["embedding"]), params.encoder)


class TestPoolSummary:
    def test_single_step_is_identity(self):
        hf, hb = NdArray([[1.0, 2.0]]), NdArray([[3.0, 4.0]])
        pooled = pool_summary(hf, hb, np.array([True]))
        np.testing.assert_array_equal(pooled.vector.data, [1.0, 2.0, 3.0, 4.0])

    def test_elementwise_max(self):
        hf = NdArray([[1.0, -1.0], [0.0, 2.0]])
        pooled = pool_summary(hf, hf, np.array([True, True]))
        np.testing.assert_array_equal(pooled.forward.data, [1.0, 2.0])


class TestMultiPerspectiveMatch:
    def test_equal_operands_give_ones(self):
        h = NdArray([0.3, -1.2, 2.0])
        W = NdArray(np.random.default_rng(0).uniform(0.5, 1.5, size=(4, 3)))
        np.testing.assert_allclose(multi_perspective_match(h, h, W).data, np.ones(4), atol=1e-12)

    def test_zero_row_scores_zero(self):
        W = NdArray([[1.0, 1.0], [0.0, 0.0]])
        out = multi_perspective_match(NdArray([1.0, 2.0]), NdArray([2.0, 1.0]), W)
        assert out.data[1] == 0.0

    def test_hand_value(self):
        out = multi_perspective_match(NdArray([1.0, 2.0]), NdArray([2.0, 1.0]), NdArray([[1.0, 0.5]]))
        assert out.data[0] == pytest.approx(0.857493, abs=1e-6)

    def test_width_mismatch(self):
        with pytest.raises(DimensionError):
            multi_perspective_match(NdArray([1.0, 2.0]), NdArray([1.0, 2.0]), NdArray(np.ones((2, 3))))


class TestMatchingTensor:
    def test_identical_operands_cancel(self):
        rng = np.random.default_rng(1)
        h = NdArray(rng.normal(size=(3, D)))
        oq = PooledSummary(NdArray(rng.normal(size=D)), NdArray(rng.normal(size=D)))
        M = matching_tensor(h, h, h, h, oq, NdArray(rng.normal(size=(Z, D))))
        for i in range(3):
            np.testing.assert_allclose(M.forward.data[i, i], np.zeros(Z), atol=1e-15)
            np.testing.assert_allclose(M.backward.data[i, i], np.zeros(Z), atol=1e-15)

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            N, Nn = rng.integers(1, 5, size=2)
            pos = [rng.normal(size=(N, D)) for _ in range(2)]
            neg = [rng.normal(size=(Nn, D)) for _ in range(2)]
            oq = [rng.normal(size=D) for _ in range(2)]
            W = rng.normal(size=(Z, D))
            M = matching_tensor(
                NdArray(pos[0]), NdArray(pos[1]), NdArray(neg[0]), NdArray(neg[1]),
                PooledSummary(NdArray(oq[0]), NdArray(oq[1])), NdArray(W),
            )
            for d, got in enumerate((M.forward.data, M.backward.data)):
                expected = np.zeros((N, Nn, Z))
                for i in range(N):
                    for j in range(Nn):
                        for z in range(Z):
                            expected[i, j, z] = (
                                _cos(pos[d][i] * W[z], oq[d] * W[z]) - _cos(neg[d][j] * W[z], oq[d] * W[z])
                            )
                np.testing.assert_allclose(got, expected, atol=1e-12)

    def test_swapping_positive_and_negative_negates(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            N, Nn = rng.integers(1, 5, size=2)
            pos_f, pos_b = NdArray(rng.normal(size=(N, D))), NdArray(rng.normal(size=(N, D)))
            neg_f, neg_b = NdArray(rng.normal(size=(Nn, D))), NdArray(rng.normal(size=(Nn, D)))
            oq = PooledSummary(NdArray(rng.normal(size=D)), NdArray(rng.normal(size=D)))
            W = NdArray(rng.normal(size=(Z, D)))
            M = matching_tensor(pos_f, pos_b, neg_f, neg_b, oq, W)
            swapped = matching_tensor(neg_f, neg_b, pos_f, pos_b, oq, W)
            np.testing.assert_allclose(swapped.forward.data, -M.forward.data.transpose(1, 0, 2), atol=1e-15)
            np.testing.assert_allclose(swapped.backward.data, -M.backward.data.transpose(1, 0, 2), atol=1e-15)

    def test_empty_negative(self):
        h = NdArray(np.ones((2, D)))
        oq = PooledSummary(NdArray(np.ones(D)), NdArray(np.ones(D)))
        empty = NdArray(np.zeros((0, D)))
        with pytest.raises(DegenerateInputError):
            matching_tensor(h, h, empty, empty, oq, NdArray(np.ones((Z, D))))


class TestAggregateNegative:
    def _inputs(self, rng, N, Nn):
        M = MatchingTensor(NdArray(rng.normal(size=(N, Nn, Z))), NdArray(rng.normal(size=(N, Nn, Z))))
        return (
            M,
            NdArray(rng.normal(size=2 * D)),
            NdArray(rng.normal(size=2 * D)),
            NdArray(rng.normal(size=2 * D)),
            NdArray(rng.normal(size=2 * D)),
        )

    def test_single_negative_token(self):
        rng = np.random.default_rng(3)
        M, o_pos, o_neg, w_plus, w_minus = self._inputs(rng, 3, 1)
        m_f, m_b = aggregate_negative(M, o_pos, o_neg, w_plus, w_minus, NdArray(rng.normal(size=Z)), np.array([True]))
        np.testing.assert_allclose(m_f.data, M.forward.data[:, 0], atol=1e-15)
        np.testing.assert_allclose(m_b.data, M.backward.data[:, 0], atol=1e-15)

    def test_zero_matching_weights_give_a_uniform_mean(self):
        rng = np.random.default_rng(4)
        M, o_pos, o_neg, w_plus, w_minus = self._inputs(rng, 2, 4)
        mask = np.array([True, True, False, True])
        m_f, _ = aggregate_negative(M, o_pos, o_neg, w_plus, w_minus, NdArray(np.zeros(Z)), mask)
        np.testing.assert_allclose(m_f.data, M.forward.data[:, mask].mean(axis=1), atol=1e-12)

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            N, Nn = rng.integers(1, 5, size=2)
            M, o_pos, o_neg, w_plus, w_minus = self._inputs(rng, N, Nn)
            w_m = rng.normal(size=Z)
            mask = rng.random(Nn) < 0.7
            mask[rng.integers(Nn)] = True
            m_f, _ = aggregate_negative(M, o_pos, o_neg, w_plus, w_minus, NdArray(w_m), mask)
            base = w_plus.data @ o_pos.data + w_minus.data @ o_neg.data
            for i in range(N):
                energies = np.array([np.tanh(base + w_m @ M.forward.data[i, j]) for j in range(Nn)])
                weights = np.where(mask, np.exp(energies - energies[mask].max()), 0.0)
                weights /= weights.sum()
                expected = sum(weights[j] * M.forward.data[i, j] for j in range(Nn))
                np.testing.assert_allclose(m_f.data[i], expected, atol=1e-12)

    def test_all_negative_tokens_masked(self):
        rng = np.random.default_rng(6)
        M, o_pos, o_neg, w_plus, w_minus = self._inputs(rng, 2, 2)
        with pytest.raises(DegenerateInputError):
            aggregate_negative(M, o_pos, o_neg, w_plus, w_minus, NdArray(np.ones(Z)), np.array([False, False]))


class TestSmoothAndFuse:
    def _smoothing(self, rng, z, zero=False):
        shapes = [(2 * z, 4 * z), (z, 4 * z), (4 * z,)]
        make = (lambda s: np.zeros(s)) if zero else (lambda s: rng.normal(size=s))
        return LstmCellParams(*[parameter(make(s)) for s in shapes])

    def test_width(self):
        rng = np.random.default_rng(7)
        fw, bw = self._smoothing(rng, 2), self._smoothing(rng, 2)
        mpm = smooth_and_fuse(NdArray(rng.normal(size=(5, 6))), NdArray(rng.normal(size=(5, 4))), fw, bw, np.ones(5, dtype=bool))
        assert mpm.width == 2 * (3 + 2) == 10

    def test_zero_smoothing_params(self):
        rng = np.random.default_rng(8)
        fw, bw = self._smoothing(rng, 2, zero=True), self._smoothing(rng, 2, zero=True)
        hidden = rng.normal(size=(5, 6))
        mpm = smooth_and_fuse(NdArray(hidden), NdArray(rng.normal(size=(5, 4))), fw, bw, np.ones(5, dtype=bool))
        np.testing.assert_array_equal(mpm.hidden.data[:, :6], hidden)
        np.testing.assert_array_equal(mpm.hidden.data[:, 6:], np.zeros((5, 4)))

    def test_shape_mismatch(self):
        rng = np.random.default_rng(9)
        fw, bw = self._smoothing(rng, 2), self._smoothing(rng, 2)
        with pytest.raises(DimensionError):
            smooth_and_fuse(NdArray(np.zeros((5, 6))), NdArray(np.zeros((4, 4))), fw, bw, np.ones(5, dtype=bool))


class TestEncodeSources:
    def test_widths(self):
        sources = _encode(_params())
        assert sources.passages.hidden.shape == (2, 4, 2 * (D + Z))
        assert sources.question.hidden.shape == (3, 2 * (D + Z))

    def test_needs_one_negative_per_passage(self):
        with pytest.raises(DegenerateInputError):
            _encode(_params(), negatives=NEGATIVES[:1])

    def test_single_argument_matching_ignores_negatives(self):
        params = _params("no_neg")
        a = _encode(params, negatives=None)
        b = _encode(params, negatives=NEGATIVES)
        np.testing.assert_array_equal(a.passages.hidden.data, b.passages.hidden.data)

    def test_negatives_change_the_memory(self):
        params = _params()
        a = _encode(params)
        b = _encode(params, negatives=[NEGATIVES[1], NEGATIVES[0]])
        assert not np.allclose(a.passages.hidden.data, b.passages.hidden.data)

    def test_padding_invariance(self):
        params = _params()
        plain = _encode(params)
        padded = _encode(params, width=7)
        np.testing.assert_allclose(padded.passages.hidden.data[:, :4], plain.passages.hidden.data, atol=1e-12)
        np.testing.assert_array_equal(padded.passages.hidden.data[:, 4:], np.zeros((2, 3, 2 * (D + Z))))
        np.testing.assert_allclose(padded.question.hidden.data, plain.question.hidden.data, atol=1e-12)

    def test_identical_positive_and_negative_cancel(self):
        # m_ij vanishes token by token, so a one-token pair zeroes the whole matching vector
        params = _params()
        enc = params.encoder
        passage = np.array([7])
        H = build_passage_mpm(QUESTION, passage, passage, EmbeddingTable(params["embedding"]), enc)
        zeros = NdArray(np.zeros((len(passage), 2 * Z)))
        mask = np.ones(len(passage), dtype=bool)
        smoothed = np.concatenate(
            [run_lstm(enc.smooth_fw, zeros, mask).data, run_lstm(enc.smooth_bw, zeros, mask, reverse=True).data],
            axis=-1,
        )
        np.testing.assert_allclose(H.hidden.data[:, 2 * D:], smoothed, atol=1e-12)

    def test_question_memory_of_one_passage(self):
        params = _params()
        table = EmbeddingTable(params["embedding"])
        single = build_question_mpm(QUESTION, PASSAGES[:1], NEGATIVES[:1], table, params.encoder)
        doubled = build_question_mpm(QUESTION, PASSAGES[:1] * 2, NEGATIVES[:1] * 2, table, params.encoder)
        np.testing.assert_allclose(doubled.hidden.data, single.hidden.data, atol=1e-12)

    def test_question_memory_needs_a_passage(self):
        params = _params()
        with pytest.raises(DegenerateInputError):
            build_question_mpm(QUESTION, [], None, EmbeddingTable(params["embedding"]), params.encoder)

    @pytest.mark.parametrize("name", ["enc.w_m", "enc.w_plus", "enc.W_p_hat", "enc.W_q_hat", "enc.smooth.fw.U"])
    def test_gradients(self, name):
        params = _params()
        rng = np.random.default_rng(10)
        rp = NdArray(rng.normal(size=(2, 4, 2 * (D + Z))))
        rq = NdArray(rng.normal(size=(3, 2 * (D + Z))))

        def f():
            sources = _encode(params)
            return ops.add(ops.sum(ops.mul(sources.passages.hidden, rp)), ops.sum(ops.mul(sources.question.hidden, rq)))

        _, analytic, numeric = grad_check_detail(f, params[name])
        np.testing.assert_allclose(analytic, numeric, rtol=1e-4, atol=1e-8)
