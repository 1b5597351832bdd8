"""Lowercasing word/punctuation tokenizer."""
import re
from typing import List

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def tokenize(text: str) -> List[str]:
    """Lowercase, split on whitespace, punctuation marks become their own tokens."""
    if not text:
        return []
    return _TOKEN_RE.findall(text.lower())


def detokenize(tokens: List[str]) -> str:
    return " ".join(tokens)
