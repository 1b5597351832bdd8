import numpy as np
import pytest

from config.errors import ConfigError, DegenerateInputError
from numerics import parameter
from vocab import (
    BOS_ID,
    EOS_ID,
    PAD_ID,
    SPECIALS,
    UNK_ID,
    EmbeddingTable,
    Vocabulary,
    build_vocab,
    map_extended,
    tokenize,
)


class TestBuildVocab:
    def test_all_fit(self):
        vocab = build_vocab([["a", "a", "b"]], max_size=6)
        assert vocab.tokens == list(SPECIALS) + ["a", "b"]

    def test_capacity_keeps_most_frequent(self):
        vocab = build_vocab([tokenize("a a b b b c")], max_size=5)
        assert vocab.tokens == list(SPECIALS) + ["b"]

    def test_ties_break_lexicographically(self):
        vocab = build_vocab([tokenize("b b a a")], max_size=5)
        assert vocab.tokens[4:] == ["a"]

    def test_specials_have_fixed_ids(self):
        vocab = build_vocab([["x"]], max_size=10)
        assert [vocab.encode(t) for t in SPECIALS] == [PAD_ID, UNK_ID, BOS_ID, EOS_ID]
        assert vocab.encode("never-seen") == UNK_ID

    def test_too_small(self):
        with pytest.raises(ConfigError):
            build_vocab([["a"]], max_size=4)

    def test_empty_corpus(self):
        with pytest.raises(DegenerateInputError):
            build_vocab([], max_size=10)

    def test_save_load_round_trip(self, tmp_path):
        vocab = build_vocab([tokenize("the lake is big ?")], max_size=20)
        path = tmp_path / "vocab.txt"
        vocab.save(str(path))
        assert Vocabulary.load(str(path)) == vocab


class TestTokenize:
    def test_question_text(self):
        assert tokenize("Largest lake of USA?") == ["largest", "lake", "of", "usa", "?"]

    def test_empty(self):
        assert tokenize("") == []

    def test_multiple_spaces(self):
        assert tokenize("a  b") == ["a", "b"]


class TestMapExtended:
    def setup_method(self):
        self.vocab = build_vocab([["q", "r"]], max_size=10)

    def test_no_oov(self):
        ext, _, _ = map_extended(["q"], [["q", "r"]], self.vocab)
        assert len(ext) == 0
        assert ext.size == len(self.vocab)

    def test_first_occurrence_order(self):
        V = len(self.vocab)
        ext, passages, _ = map_extended(["q"], [["x", "q"], ["y", "x"]], self.vocab)
        assert ext.mapping == {"x": V, "y": V + 1}
        np.testing.assert_array_equal(passages[0], [V, self.vocab.encode("q")])
        np.testing.assert_array_equal(passages[1], [V + 1, V])

    def test_shared_between_passage_and_question(self):
        V = len(self.vocab)
        ext, passages, question = map_extended(["z", "q"], [["q"], ["r", "z"]], self.vocab)
        assert len(ext) == 1
        assert passages[1][1] == question[0] == V

    def test_gold_oov_outside_source_maps_to_unk(self):
        ext, _, _ = map_extended(["q"], [["x"]], self.vocab)
        assert ext.id_of("x", self.vocab) == len(self.vocab)
        assert ext.id_of("elsewhere", self.vocab) == UNK_ID
        assert ext.token_of(len(self.vocab), self.vocab) == "x"


class TestEmbeddingTable:
    def test_pad_row_is_zero(self):
        table = EmbeddingTable(parameter(np.ones((6, 3))))
        np.testing.assert_array_equal(table.weight.data[PAD_ID], np.zeros(3))

    def test_extended_ids_fall_back_to_unk(self):
        weight = np.arange(18.0).reshape(6, 3)
        table = EmbeddingTable(parameter(weight))
        rows = table.lookup(np.array([5, 9])).data
        np.testing.assert_array_equal(rows[0], weight[5])
        np.testing.assert_array_equal(rows[1], weight[UNK_ID])
