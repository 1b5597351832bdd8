from .tokenizer import tokenize, detokenize
from .vocabulary import (
    Vocabulary,
    build_vocab,
    SPECIALS,
    PAD_ID,
    UNK_ID,
    BOS_ID,
    EOS_ID,
)
from .extended import ExtendedVocabMap, map_extended
from .embedding import EmbeddingTable

__all__ = [
    "tokenize",
    "detokenize",
    "Vocabulary",
    "build_vocab",
    "SPECIALS",
    "PAD_ID",
    "UNK_ID",
    "BOS_ID",
    "EOS_ID",
    "ExtendedVocabMap",
    "map_extended",
    "EmbeddingTable",
]
