"""Synthetic correlated-entity task.

Each example asks about a query token q. Every passage is filler text with a
few entity mentions. The key entity is mentioned in ``cooccurrence`` passages
while each distractor is mentioned in exactly one, so picking the answer
requires counting evidence across passages. The answer binds the query to the
key: "the q is <key>". The query token itself only occurs in the question, so
the passages hold no marker that competes with the entity for copy mass.
"""
from dataclasses import asdict, dataclass
from typing import List

from loguru import logger

from config.errors import ConfigError
from data.dataset import DatasetRecord, write_dataset
from numerics import SeededRng

QUESTION_TEMPLATE = "which {q} appears in several passages ?"
ANSWER_TEMPLATE = "the {q} is {e}"
TEMPLATE_WORDS = ("which", "appears", "in", "several", "passages", "?", "the", "is")


@dataclass(frozen=True)
class SyntheticTaskSpec:
    vocab_size: int = 400
    num_passages: int = 3
    passage_len: int = 20
    num_examples: int = 1000
    cooccurrence: int = 2
    distractors: int = 3
    seed: int = 7

    def pools(self):
        """Split the token budget into disjoint query, entity and filler pools."""
        budget = self.vocab_size - len(TEMPLATE_WORDS)
        n_query = max(2, budget // 8)
        n_entity = max(self.distractors + 1, budget // 4)
        n_filler = budget - n_query - n_entity
        return (
            [f"q{i}" for i in range(n_query)],
            [f"e{i}" for i in range(n_entity)],
            [f"w{i}" for i in range(max(n_filler, 0))],
        )

    def validate(self) -> None:
        if self.num_examples < 1:
            raise ConfigError("num_examples must be positive")
        if self.num_passages < 2:
            raise ConfigError("num_passages must be at least 2")
        if not 2 <= self.cooccurrence <= self.num_passages:
            raise ConfigError(
                f"cooccurrence {self.cooccurrence} must lie in [2, num_passages={self.num_passages}]"
            )
        if self.distractors < 0:
            raise ConfigError("distractors must be non-negative")
        queries, entities, fillers = self.pools()
        if len(entities) < self.distractors + 1 or not fillers:
            raise ConfigError(f"vocab_size {self.vocab_size} is too small for {self.distractors} distractors")
        # worst case: the key and every distractor in one passage
        if self.passage_len < 1 + self.distractors:
            raise ConfigError(
                f"passage_len {self.passage_len} cannot hold {1 + self.distractors} entity mentions"
            )


def _passage(rng: SeededRng, mentioned: List[str], fillers: List[str], length: int) -> str:
    tokens = [fillers[rng.randint(len(fillers))] for _ in range(length - len(mentioned))] + mentioned
    order = rng.permutation(len(tokens))
    return " ".join(tokens[int(i)] for i in order)


def generate_records(spec: SyntheticTaskSpec) -> List[DatasetRecord]:
    spec.validate()
    rng = SeededRng(spec.seed)
    queries, entities, fillers = spec.pools()
    records = []
    for n in range(spec.num_examples):
        query = queries[int(rng.randint(len(queries)))]
        picked = [entities[int(i)] for i in rng.sample(len(entities), spec.distractors + 1)]
        key, distractors = picked[0], picked[1:]

        mentioned: List[List[str]] = [[] for _ in range(spec.num_passages)]
        for k in rng.sample(spec.num_passages, spec.cooccurrence):
            mentioned[int(k)].append(key)
        for d in distractors:
            mentioned[int(rng.randint(spec.num_passages))].append(d)

        records.append(
            DatasetRecord(
                id=f"syn-{spec.seed}-{n:05d}",
                question=QUESTION_TEMPLATE.format(q=query),
                passages=[_passage(rng, m, fillers, spec.passage_len) for m in mentioned],
                answer=ANSWER_TEMPLATE.format(q=query, e=key),
            )
        )
    return records


def gen_synthetic(spec: SyntheticTaskSpec, path: str) -> List[DatasetRecord]:
    """Generate the task and write it as JSONL; same spec, same bytes."""
    logger.info(f"Generating synthetic task {asdict(spec)}")
    records = generate_records(spec)
    write_dataset(records, path)
    return records
