"""Decoding over datasets: parallel generation, scoring and copy-provenance traces."""
import concurrent.futures
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from data.examples import QAExample
from metrics.scores import EvalReport, evaluate
from model.gummp import GumMp
from model.search import Hypothesis
from numerics import SeededRng
from training.negatives import NegativePool, sample_negatives
from vocab import EOS_ID, Vocabulary

TRACE_COLUMNS = [
    "id", "step", "token", "passage", "g_v", "g_a", "g_q",
    "passage_argmax_pos", "passage_argmax_token", "question_argmax_pos",
    "question_argmax_token", "source",
]


def eval_negatives(
    model: GumMp,
    examples: Sequence[QAExample],
    seed: int,
    pool_examples: Optional[Sequence[QAExample]] = None,
    fallback: Optional[NegativePool] = None,
) -> List[Optional[List[np.ndarray]]]:
    """Negatives for inference, drawn from passages of other questions with a fixed seed.

    The evaluated set is the pool; when it holds a single question the
    ``fallback`` pool (training passages saved with the checkpoint) is used.
    """
    if not model.config.uses_negatives:
        return [None] * len(examples)
    corpus = list(pool_examples) if pool_examples is not None else list(examples)
    if len({ex.id for ex in corpus}) < 2 and fallback is not None:
        logger.info(f"Drawing negatives from the saved training pool ({len(fallback)} passages)")
        pool = fallback
    else:
        pool = NegativePool(corpus)
    return sample_negatives(examples, pool, SeededRng(seed).fork(0xE7A1))


def decode_examples(
    model: GumMp,
    examples: Sequence[QAExample],
    negatives: Sequence[Optional[List[np.ndarray]]],
    beam_size: int = 1,
    max_len: int = 50,
    workers: int = 1,
) -> List[Hypothesis]:
    """Decode every example; results come back in input order whatever the worker count."""
    if workers <= 1 or len(examples) <= 1:
        return [model.decode(ex, neg, beam_size, max_len) for ex, neg in zip(examples, negatives)]

    workers = min(workers, len(examples))
    logger.info(f"Decoding {len(examples)} examples with {workers} threads")
    results: List[Optional[Hypothesis]] = [None] * len(examples)
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_idx = {
            executor.submit(model.decode, ex, neg, beam_size, max_len): i
            for i, (ex, neg) in enumerate(zip(examples, negatives))
        }
        for future in concurrent.futures.as_completed(future_to_idx):
            idx = future_to_idx[future]
            try:
                results[idx] = future.result()
            except Exception as exc:
                logger.error(f"Example {examples[idx].id} failed to decode: {exc}")
                raise
    return results


def answer_tokens(example: QAExample, hyp: Hypothesis, vocab: Vocabulary) -> List[str]:
    return example.decode(hyp.tokens, vocab)


def evaluate_model(
    model: GumMp,
    examples: Sequence[QAExample],
    vocab: Vocabulary,
    negatives: Sequence[Optional[List[np.ndarray]]],
    beam_size: int = 1,
    max_len: int = 50,
    workers: int = 1,
) -> EvalReport:
    hyps = decode_examples(model, examples, negatives, beam_size, max_len, workers)
    candidates = [answer_tokens(ex, h, vocab) for ex, h in zip(examples, hyps)]
    return evaluate([ex.id for ex in examples], candidates, [ex.answer_tokens for ex in examples])


def trace_rows(model: GumMp, example: QAExample, negatives, hyp: Hypothesis, vocab: Vocabulary) -> List[Dict]:
    """Replay a decoded answer and report, per step and passage, where the emitted token came from."""
    memory = model.encode(example, negatives)
    emitted = list(hyp.tokens) + ([EOS_ID] if hyp.finished else [])
    outputs = model.teacher_forced(memory, emitted)
    K = memory.num_passages
    rows = []
    for step, (token, out) in enumerate(zip(emitted, outputs)):
        gates = out.gates.data
        alpha, alpha_q = out.alpha.data, out.alpha_q.data
        vocab_share = float(np.sum(gates[:, 0] * out.vocab.data[:, token])) / K
        passage_share = gates[:, 1] * out.passage_copy.data[:, token] / K
        question_share = float(np.sum(gates[:, 2] * out.question_copy.data[:, token])) / K
        shares = [vocab_share] + list(passage_share) + [question_share]
        best = int(np.argmax(shares))
        source = "vocab" if best == 0 else ("question" if best == K + 1 else f"passage_{best - 1}")
        for k in range(K):
            p_pos = int(np.argmax(alpha[k]))
            q_pos = int(np.argmax(alpha_q[k]))
            rows.append(
                {
                    "id": example.id,
                    "step": step,
                    "token": example.ext_map.token_of(token, vocab),
                    "passage": k,
                    "g_v": float(gates[k, 0]),
                    "g_a": float(gates[k, 1]),
                    "g_q": float(gates[k, 2]),
                    "passage_argmax_pos": p_pos,
                    "passage_argmax_token": example.passage_tokens[k][p_pos],
                    "question_argmax_pos": q_pos,
                    "question_argmax_token": example.question_tokens[q_pos],
                    "source": source,
                }
            )
    return rows


def write_trace(rows: List[Dict], path: str) -> pd.DataFrame:
    df = pd.DataFrame(rows, columns=TRACE_COLUMNS)
    df.to_csv(path, index=False)
    logger.info(f"Wrote {len(df)} trace rows to {path}")
    return df
