from .dataset import DatasetRecord, TokenizedRecord, ingest, read_records, write_dataset
from .examples import Batch, QAExample, build_example, build_examples, pad_sequences, vocab_corpus
from .synthetic import SyntheticTaskSpec, gen_synthetic, generate_records

__all__ = [
    "DatasetRecord",
    "TokenizedRecord",
    "ingest",
    "read_records",
    "write_dataset",
    "Batch",
    "QAExample",
    "build_example",
    "build_examples",
    "pad_sequences",
    "vocab_corpus",
    "SyntheticTaskSpec",
    "gen_synthetic",
    "generate_records",
]
