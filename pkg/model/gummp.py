"""Model facade: encode an example once, then decode greedily, by beam, or by teacher forcing."""
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config.errors import ContractError
from config.schema import ModelConfig
from data.examples import QAExample
from model.decoder import DecoderState, SourceMemory, StepOutput, decode_step, initial_state
from model.encoder import EncodedSources, encode_sources
from model.memory import build_memories
from model.params import ModelParams
from model.search import Hypothesis, beam_search, greedy_search
from numerics import SeededRng
from vocab import BOS_ID, EOS_ID, EmbeddingTable


class GumMp:
    def __init__(self, params: ModelParams):
        self.params = params
        self.config: ModelConfig = params.config
        self.embedding = EmbeddingTable(params["embedding"])

    @classmethod
    def initialize(cls, config: ModelConfig, rng: SeededRng) -> "GumMp":
        return cls(ModelParams.initialize(config, rng))

    def encode_sources(self, example: QAExample, negatives: Optional[Sequence[np.ndarray]] = None) -> EncodedSources:
        if example.num_passages > self.config.k_max:
            raise ContractError(f"example {example.id} has {example.num_passages} passages, K_max is {self.config.k_max}")
        if not self.config.uses_negatives:
            negatives = None
        return encode_sources(
            example.question_ids,
            example.passage_ids,
            example.passage_mask,
            negatives,
            self.embedding,
            self.params.encoder,
        )

    def encode(self, example: QAExample, negatives: Optional[Sequence[np.ndarray]] = None) -> SourceMemory:
        sources = self.encode_sources(example, negatives)
        memories = build_memories(sources.passages, self.params.alignment, self.config.n_max)
        return SourceMemory(
            passages=memories,
            question=sources.question,
            passage_ext=example.passage_ext,
            question_ext=example.question_ext,
            extended_size=max(example.extended_size, self.config.decoder_vocab_size),
        )

    def initial_state(self, memory: SourceMemory) -> DecoderState:
        return initial_state(memory, self.config.decoder_hidden, BOS_ID)

    def step(self, memory: SourceMemory, state: DecoderState) -> Tuple[StepOutput, DecoderState]:
        return decode_step(self.params.decoder, self.embedding, memory, state)

    def teacher_forced(self, memory: SourceMemory, targets: Sequence[int]) -> List[StepOutput]:
        """Step outputs when feeding BOS then each gold token but the last."""
        state = self.initial_state(memory)
        outputs = []
        for token in targets:
            out, state = self.step(memory, state)
            outputs.append(out)
            state = state.feed(token)
        return outputs

    def _step_fn(self, memory: SourceMemory):
        def _fn(state: DecoderState, prev: int):
            out, new_state = self.step(memory, state.feed(prev))
            return out.final.data, new_state

        return _fn

    def greedy_decode(
        self, example: QAExample, negatives: Optional[Sequence[np.ndarray]] = None, max_len: int = 50
    ) -> Hypothesis:
        memory = self.encode(example, negatives)
        return greedy_search(self._step_fn(memory), self.initial_state(memory), BOS_ID, EOS_ID, max_len)

    def beam_decode(
        self,
        example: QAExample,
        negatives: Optional[Sequence[np.ndarray]] = None,
        beam_size: int = 20,
        max_len: int = 50,
    ) -> Hypothesis:
        memory = self.encode(example, negatives)
        return beam_search(self._step_fn(memory), self.initial_state(memory), BOS_ID, EOS_ID, beam_size, max_len)

    def decode(
        self,
        example: QAExample,
        negatives: Optional[Sequence[np.ndarray]] = None,
        beam_size: int = 1,
        max_len: int = 50,
    ) -> Hypothesis:
        if beam_size == 1:
            return self.greedy_decode(example, negatives, max_len)
        return self.beam_decode(example, negatives, beam_size, max_len)
