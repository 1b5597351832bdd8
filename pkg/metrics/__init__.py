from .scores import EvalReport, bleu1, rouge_l, lcs_length, evaluate, score_texts

__all__ = ["EvalReport", "bleu1", "rouge_l", "lcs_length", "evaluate", "score_texts"]
