"""BLEU-1 and ROUGE-L scorers."""
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

from config.errors import ContractError, DegenerateInputError
from config.schema import canonical_json
from vocab.tokenizer import tokenize

ROUGE_BETA = 1.2

Tokens = Sequence[str]


def _clipped_matches(candidate: Tokens, reference: Tokens) -> int:
    ref_counts = Counter(reference)
    return sum(min(n, ref_counts[tok]) for tok, n in Counter(candidate).items())


def bleu1(candidates: Sequence[Tokens], references: Sequence[Tokens]) -> float:
    """Corpus BLEU-1: pooled clipped unigram precision times the corpus brevity penalty."""
    if not candidates:
        raise DegenerateInputError("bleu1: empty candidate set")
    if len(candidates) != len(references):
        raise ContractError(f"bleu1: {len(candidates)} candidates vs {len(references)} references")
    matches = sum(_clipped_matches(c, r) for c, r in zip(candidates, references))
    c_len = sum(len(c) for c in candidates)
    r_len = sum(len(r) for r in references)
    if c_len == 0:
        return 0.0
    bp = 1.0 if c_len > r_len else math.exp(1.0 - r_len / c_len)
    return (matches / c_len) * bp


def lcs_length(a: Tokens, b: Tokens) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: Tokens, reference: Tokens, beta: float = ROUGE_BETA) -> float:
    lcs = lcs_length(candidate, reference)
    if lcs == 0:
        return 0.0
    recall = lcs / len(reference)
    precision = lcs / len(candidate)
    b2 = beta * beta
    return (1.0 + b2) * recall * precision / (recall + b2 * precision)


@dataclass
class EvalReport:
    bleu1: float
    rouge_l: float
    n_examples: int
    per_example: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "bleu1": self.bleu1,
            "rougeL": self.rouge_l,
            "n_examples": self.n_examples,
            "per_example": self.per_example,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json())

    @classmethod
    def load(cls, path: str) -> "EvalReport":
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        return cls(data["bleu1"], data["rougeL"], data["n_examples"], data["per_example"])


def evaluate(ids: Sequence[str], candidates: Sequence[Tokens], references: Sequence[Tokens]) -> EvalReport:
    """Corpus BLEU-1 plus macro-averaged ROUGE-L over token sequences."""
    if len(ids) != len(candidates):
        raise ContractError(f"evaluate: {len(ids)} ids vs {len(candidates)} candidates")
    corpus_bleu = bleu1(candidates, references)
    per_example = []
    for qid, cand, ref in zip(ids, candidates, references):
        per_example.append(
            {
                "id": qid,
                "bleu1": bleu1([cand], [ref]),
                "rougeL": rouge_l(cand, ref),
                "candidate": " ".join(cand),
                "reference": " ".join(ref),
            }
        )
    macro_rouge = sum(e["rougeL"] for e in per_example) / len(per_example)
    return EvalReport(corpus_bleu, macro_rouge, len(per_example), per_example)


def score_texts(ids: Sequence[str], candidates: Sequence[str], references: Sequence[str]) -> EvalReport:
    """Tokenize raw strings with the model tokenizer, then evaluate."""
    return evaluate(ids, [tokenize(c) for c in candidates], [tokenize(r) for r in references])
