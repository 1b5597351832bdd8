"""Shared fixtures: a three-question corpus small enough for finite differences."""
import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config.schema import TrainConfig  # noqa: E402
from data.dataset import DatasetRecord, tokenize_record  # noqa: E402
from data.examples import build_examples, vocab_corpus  # noqa: E402
from model.gummp import GumMp  # noqa: E402
from numerics import SeededRng  # noqa: E402
from training.negatives import sample_negatives  # noqa: E402
from vocab import build_vocab  # noqa: E402

TINY_RECORDS = [
    DatasetRecord("q1", "where is the lake ?", ["the lake is big", "a big lake is here"], "the lake is big"),
    DatasetRecord("q2", "what is big ?", ["the hill is big", "a lake is here"], "the hill"),
    DatasetRecord("q3", "where is the hill ?", ["a hill is here", "the big hill"], "a hill is here"),
]


@pytest.fixture
def tiny_config() -> TrainConfig:
    return TrainConfig(
        embed_dim=4,
        perspectives=2,
        pam_width=3,
        k_max=2,
        max_question_len=8,
        max_passage_len=6,
        max_answer_len=6,
        vocab_size=20,
        epochs=2,
        batch_size=2,
        seed=11,
        learning_rate=0.01,
        beam_size=2,
    )


@pytest.fixture
def tiny_records(tiny_config):
    c = tiny_config
    return [
        tokenize_record(r, c.max_question_len, c.max_passage_len, c.max_answer_len, c.k_max)
        for r in TINY_RECORDS
    ]


@pytest.fixture
def tiny_vocab(tiny_records, tiny_config):
    return build_vocab(vocab_corpus(tiny_records), tiny_config.vocab_size)


@pytest.fixture
def tiny_examples(tiny_records, tiny_vocab):
    return build_examples(tiny_records, tiny_vocab)


@pytest.fixture
def tiny_negatives(tiny_examples):
    return sample_negatives(tiny_examples, tiny_examples, SeededRng(5))


@pytest.fixture
def make_model(tiny_config, tiny_vocab):
    """Factory: a freshly initialized model for an ablation mode and seed."""

    def _make(ablation: str = "full", seed: int = 0, **overrides) -> GumMp:
        config = tiny_config.override(ablation=ablation, **overrides)
        return GumMp.initialize(config.model_config(len(tiny_vocab)), SeededRng(seed))

    return _make
