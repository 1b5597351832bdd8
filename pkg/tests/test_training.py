import dataclasses

import numpy as np
import pytest

from config.errors import ConfigError, DegenerateInputError, NumericError
from data.dataset import TokenizedRecord
from data.examples import Batch, build_examples
from model.params import parameter_shapes
from numerics import NdArray, SeededRng, Tape, backward, ops, parameter
from training.ablation import ablation_variants, apply_ablation, run_ablation, summarize
from training.checkpoint import decode_checkpoint, encode_checkpoint
from training.loss import compute_loss, sequence_nll
from training.negatives import NegativePool, sample_negatives
from training.optim import Adam, clip_global_norm
from training.trainer import Trainer
from vocab import build_vocab


def _corpus(n_questions, passages_per_question=2):
    records = [
        TokenizedRecord(
            id=f"q{n}",
            question=["what", f"x{n}"],
            passages=[[f"p{n}", str(k)] for k in range(passages_per_question)],
            answer=[f"x{n}"],
        )
        for n in range(n_questions)
    ]
    vocab = build_vocab([r.question + r.answer + sum(r.passages, []) for r in records], 64)
    return build_examples(records, vocab)


class TestNegatives:
    def test_single_question_corpus(self):
        with pytest.raises(ConfigError):
            NegativePool(_corpus(1))

    def test_never_draws_from_the_same_question(self):
        corpus = _corpus(3)
        pool = NegativePool(corpus)
        rng = SeededRng(0)
        for _ in range(200):
            assert pool.owners[pool.draw("q1", rng)] != "q1"

    def test_one_negative_per_passage_in_order(self, tiny_examples):
        negatives = sample_negatives(tiny_examples, tiny_examples, SeededRng(1))
        assert [len(n) for n in negatives] == [ex.num_passages for ex in tiny_examples]

    def test_same_seed_same_assignment(self):
        corpus = _corpus(4)
        a = sample_negatives(corpus, corpus, SeededRng(7))
        b = sample_negatives(corpus, corpus, SeededRng(7))
        for left, right in zip(a, b):
            for x, y in zip(left, right):
                np.testing.assert_array_equal(x, y)

    def test_selection_is_uniform(self):
        pool = NegativePool(_corpus(3))
        rng = SeededRng(2024)
        counts = np.zeros(len(pool))
        for _ in range(10_000):
            counts[pool.draw("q0", rng)] += 1
        eligible = np.array([owner != "q0" for owner in pool.owners])
        assert counts[~eligible].sum() == 0
        expected = 10_000 / eligible.sum()
        chi2 = float(np.sum((counts[eligible] - expected) ** 2 / expected))
        # 99.9th percentile of chi-square with 3 degrees of freedom
        assert chi2 < 16.27


class TestLoss:
    def test_uniform_distributions(self):
        E, T = 7, 4
        loss = sequence_nll([NdArray(np.full(E, 1.0 / E)) for _ in range(T)], [1, 2, 3, 4])
        assert loss.value == pytest.approx(T * np.log(E), abs=1e-12)

    def test_point_masses_on_gold(self):
        targets = [3, 0, 5]
        loss = sequence_nll([NdArray(np.eye(6)[t]) for t in targets], targets)
        assert loss.value == 0.0

    def test_array_targets(self):
        targets = np.array([2, 0, 1], dtype=np.int64)
        loss = sequence_nll([NdArray(np.full(3, 1.0 / 3.0)) for _ in targets], targets)
        assert loss.value == pytest.approx(3 * np.log(3.0), abs=1e-12)
        with pytest.raises(DegenerateInputError):
            sequence_nll([], np.array([], dtype=np.int64))

    def test_matches_step_by_step_accumulation(self, make_model, tiny_examples, tiny_negatives):
        model = make_model()
        ex, neg = tiny_examples[0], tiny_negatives[0]
        loss = compute_loss(model, ex, neg)
        memory = model.encode(ex, neg)
        total = 0.0
        for t, out in zip(ex.target_ids, model.teacher_forced(memory, ex.target_ids)):
            total -= np.log(max(out.final.data[t], 1e-12))
        assert abs(loss.value - total) <= 1e-10
        assert loss.value >= 0.0

    def test_empty_answer(self, make_model, tiny_examples):
        ex = dataclasses.replace(tiny_examples[0], answer_tokens=[])
        with pytest.raises(DegenerateInputError):
            compute_loss(make_model(), ex, None)


class TestOptimizer:
    def test_zero_gradients_leave_parameters_unchanged(self):
        theta = parameter([0.5, -0.25, 2.0])
        before = theta.data.copy()
        opt = Adam({"theta": theta}, lr=0.1)
        for _ in range(3):
            theta.grad = np.zeros(3)
            opt.step()
        np.testing.assert_array_equal(theta.data, before)

    def test_quadratic_bowl(self):
        theta = parameter([0.6, -0.8])
        opt = Adam({"theta": theta}, lr=0.05)
        for _ in range(500):
            opt.zero_grad()
            with Tape() as tape:
                loss = ops.sum(ops.mul(theta, theta))
            backward(loss, tape)
            opt.step()
        assert np.linalg.norm(theta.data) < 1e-3

    def test_clipping_rescales_to_the_threshold(self):
        a, b = parameter([0.0, 0.0]), parameter([0.0, 0.0])
        a.grad, b.grad = np.array([30.0, 0.0]), np.array([0.0, 40.0])
        norm, scale = clip_global_norm({"a": a, "b": b}, 5.0)
        assert norm == pytest.approx(50.0)
        assert scale == pytest.approx(0.1)
        np.testing.assert_allclose(a.grad, [3.0, 0.0])
        np.testing.assert_allclose(b.grad, [0.0, 4.0])

    def test_small_gradients_are_not_clipped(self):
        a = parameter([0.0])
        a.grad = np.array([3.0])
        assert clip_global_norm({"a": a}, 5.0) == (3.0, 1.0)


class TestAblation:
    def test_parameter_sets(self, tiny_config, tiny_vocab):
        names = {
            mode: set(parameter_shapes(apply_ablation(mode, tiny_config).model_config(len(tiny_vocab))))
            for mode in ("full", "no_neg", "no_um", "mpqg")
        }
        assert {"enc.w_m", "mem.W_p"} <= names["full"]
        assert "enc.w_m" not in names["no_neg"] and "mem.W_p" in names["no_neg"]
        assert "enc.w_m" in names["no_um"] and "mem.W_p" not in names["no_um"]
        assert not {"enc.w_m", "mem.W_p"} & names["mpqg"]

    def test_memory_widths(self, make_model, tiny_examples, tiny_negatives):
        D, Z, L = 4, 2, 3
        full = make_model("full").encode(tiny_examples[0], tiny_negatives[0])
        no_um = make_model("no_um").encode(tiny_examples[0], tiny_negatives[0])
        assert full.passages.hidden.shape[-1] == 2 * (D + Z) + L
        assert no_um.passages.hidden.shape[-1] == 2 * (D + Z)

    def test_no_neg_ignores_negatives(self, make_model, tiny_examples, tiny_negatives):
        model = make_model("no_neg")
        ex = tiny_examples[0]
        a = model.encode(ex, tiny_negatives[0]).passages.hidden.data
        b = model.encode(ex, tiny_negatives[1]).passages.hidden.data
        np.testing.assert_array_equal(a, b)

    def test_cli_spelling_and_unknown_modes(self, tiny_config):
        assert apply_ablation("no-um", tiny_config).ablation == "no_um"
        with pytest.raises(ConfigError):
            apply_ablation("no_memory", tiny_config)

    def test_width_sweep_rows(self, tiny_config):
        variants = ablation_variants(tiny_config, ("full", "no_neg", "no_um"), pam_widths=(5, 7))
        assert [v.name for v in variants] == ["GUM-MP", "w/o Neg", "w/o UM", "UM(5)", "UM(7)"]
        assert [v.config.pam_width for v in variants[3:]] == [5, 7]
        assert all(v.config.ablation == "full" for v in variants[3:])

    def test_run_and_summarize(self, tiny_config, tiny_records):
        runs = run_ablation(
            tiny_config.override(epochs=1), tiny_records, tiny_records,
            seeds=[1, 2], modes=("full", "mpqg"), pam_widths=(2,), max_len=4,
        )
        assert list(runs.columns) == ["variant", "ablation", "pam_width", "seed", "final_loss", "bleu1", "rougeL"]
        assert len(runs) == 6
        table = summarize(runs)
        assert table["variant"].tolist() == ["GUM-MP", "MPQG", "UM(2)"]
        assert table["seeds"].tolist() == [2, 2, 2]


class TestTrainer:
    def test_same_seed_same_trajectory(self, tiny_config, tiny_vocab, tiny_examples):
        a = Trainer(tiny_config, tiny_vocab, tiny_examples)
        b = Trainer(tiny_config, tiny_vocab, tiny_examples)
        a.fit()
        b.fit()
        assert len(a.history) == tiny_config.epochs
        assert a.history == b.history

    def test_resume_continues_the_trajectory(self, tiny_config, tiny_vocab, tiny_examples):
        config = tiny_config.override(epochs=3)
        straight = Trainer(config, tiny_vocab, tiny_examples)
        straight.fit()

        first = Trainer(config, tiny_vocab, tiny_examples)
        first.fit(epochs=1)
        resumed = Trainer.from_checkpoint(decode_checkpoint(encode_checkpoint(first.to_checkpoint())), tiny_examples)
        assert resumed.epoch == 1
        resumed.fit()
        assert resumed.history == straight.history

    def test_fixed_negatives_are_reused(self, tiny_config, tiny_vocab, tiny_examples):
        trainer = Trainer(tiny_config.override(resample_negatives=False), tiny_vocab, tiny_examples)
        assert trainer.epoch_negatives() is trainer.epoch_negatives()

    def test_training_step_keeps_pad_row_zero(self, tiny_config, tiny_vocab, tiny_examples, tiny_negatives):
        trainer = Trainer(tiny_config, tiny_vocab, tiny_examples)
        loss = trainer.train_step(Batch(tiny_examples, tiny_negatives))
        assert np.isfinite(loss)
        np.testing.assert_array_equal(trainer.model.params["embedding"].data[0], np.zeros(4))

    def test_non_finite_loss_aborts_with_diagnostics(self, tiny_config, tiny_vocab, tiny_examples, tiny_negatives):
        trainer = Trainer(tiny_config, tiny_vocab, tiny_examples)
        trainer.model.params["dec.b_v"].data[:] = np.nan
        with pytest.raises(NumericError) as err:
            trainer.train_step(Batch(tiny_examples[:1], tiny_negatives[:1]))
        assert err.value.diagnostics["examples"] == [tiny_examples[0].id]

    def test_dev_scores_are_recorded(self, tiny_config, tiny_vocab, tiny_examples):
        trainer = Trainer(tiny_config.override(epochs=1), tiny_vocab, tiny_examples[:2], tiny_examples[2:])
        stats = trainer.fit()
        assert stats[0].dev_bleu1 is not None
        assert 0.0 <= stats[0].dev_rouge_l <= 1.0
