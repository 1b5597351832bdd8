from .params import ModelParams, LstmCellParams, EncoderParams, DecoderParams, parameter_shapes
from .lstm import lstm_step, lstm_sequence, run_lstm
from .encoder import (
    Mpm,
    MatchingTensor,
    PooledSummary,
    EncodedSources,
    bilstm_encode,
    pool_summary,
    multi_perspective_match,
    matching_tensor,
    aggregate_negative,
    smooth_and_fuse,
    encode_sources,
    build_passage_mpm,
    build_question_mpm,
)
from .memory import Pam, Um, build_pam, build_um, build_memories
from .decoder import (
    DecoderState,
    SourceMemory,
    StepOutput,
    initial_state,
    step_state,
    attend,
    features,
    vocab_dist,
    copy_dists,
    gates_and_final,
    decode_step,
)
from .search import Hypothesis, greedy_search, beam_search, token_log_prob
from .gummp import GumMp

__all__ = [
    "ModelParams",
    "LstmCellParams",
    "EncoderParams",
    "DecoderParams",
    "parameter_shapes",
    "lstm_step",
    "lstm_sequence",
    "run_lstm",
    "Mpm",
    "MatchingTensor",
    "PooledSummary",
    "EncodedSources",
    "bilstm_encode",
    "pool_summary",
    "multi_perspective_match",
    "matching_tensor",
    "aggregate_negative",
    "smooth_and_fuse",
    "encode_sources",
    "build_passage_mpm",
    "build_question_mpm",
    "Pam",
    "Um",
    "build_pam",
    "build_um",
    "build_memories",
    "DecoderState",
    "SourceMemory",
    "StepOutput",
    "initial_state",
    "step_state",
    "attend",
    "features",
    "vocab_dist",
    "copy_dists",
    "gates_and_final",
    "decode_step",
    "Hypothesis",
    "greedy_search",
    "beam_search",
    "token_log_prob",
    "GumMp",
]
