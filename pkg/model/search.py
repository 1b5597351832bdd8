"""Greedy and beam search over any step function returning a next-token distribution."""
from dataclasses import dataclass, field
from typing import Any, Callable, List, Tuple

import numpy as np

from config.errors import ContractError
from config.settings import NUMERICS_CONFIG

LOG_FLOOR = NUMERICS_CONFIG["log_floor"]

# (state, previous token) -> (probabilities over the extended vocabulary, next state)
StepFn = Callable[[Any, int], Tuple[np.ndarray, Any]]


@dataclass
class Hypothesis:
    tokens: List[int]
    log_prob: float
    finished: bool
    state: Any = field(default=None, repr=False, compare=False)


def token_log_prob(probs: np.ndarray, token: int) -> float:
    return float(np.log(max(probs[token], LOG_FLOOR)))


def greedy_search(step_fn: StepFn, init_state: Any, bos_id: int, eos_id: int, max_len: int) -> Hypothesis:
    """Argmax each step; ties go to the lowest id."""
    hyp = Hypothesis([], 0.0, False, init_state)
    prev = bos_id
    for _ in range(max_len):
        probs, hyp.state = step_fn(hyp.state, prev)
        logp = np.log(np.maximum(probs, LOG_FLOOR))
        token = int(np.argmax(logp))
        hyp.log_prob += float(logp[token])
        if token == eos_id:
            hyp.finished = True
            break
        hyp.tokens.append(token)
        prev = token
    return hyp


def beam_search(
    step_fn: StepFn, init_state: Any, bos_id: int, eos_id: int, beam_size: int, max_len: int
) -> Hypothesis:
    """Beam search without length normalization.

    Each step keeps the ``beam_size`` best expansions of all live hypotheses;
    expansions ending in EOS retire to the finished pool. The search stops
    once the best finished score is at least the best live score, since
    scores only decrease. Returns the best finished hypothesis, else the best
    live one.
    """
    if beam_size < 1:
        raise ContractError(f"beam_size must be positive, got {beam_size}")
    live = [Hypothesis([], 0.0, False, init_state)]
    finished: List[Hypothesis] = []

    for _ in range(max_len):
        candidates = []
        for rank, hyp in enumerate(live):
            probs, state = step_fn(hyp.state, hyp.tokens[-1] if hyp.tokens else bos_id)
            logp = np.log(np.maximum(probs, LOG_FLOOR))
            for token in np.argsort(-logp, kind="stable")[:beam_size]:
                candidates.append((hyp.log_prob + float(logp[token]), rank, int(token), state, hyp))
        candidates.sort(key=lambda c: (-c[0], c[1], c[2]))

        live = []
        for score, _, token, state, parent in candidates[:beam_size]:
            if token == eos_id:
                finished.append(Hypothesis(list(parent.tokens), score, True, state))
            else:
                live.append(Hypothesis(parent.tokens + [token], score, False, state))
        if not live:
            break
        if finished and max(h.log_prob for h in finished) >= live[0].log_prob:
            break

    if finished:
        # max() keeps the earliest retired hypothesis among equal scores
        return max(finished, key=lambda h: h.log_prob)
    return live[0]
