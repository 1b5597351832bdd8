"""JSONL dataset ingestion and validation."""
import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from loguru import logger

from config.errors import ValidationError
from vocab.tokenizer import detokenize, tokenize

REQUIRED_FIELDS = ("id", "question", "passages", "answer")


@dataclass
class DatasetRecord:
    """One question with its passages and gold answer, as raw text."""
    id: str
    question: str
    passages: List[str]
    answer: str

    def to_json(self) -> str:
        return json.dumps(
            {"id": self.id, "question": self.question, "passages": self.passages, "answer": self.answer},
            sort_keys=True,
            ensure_ascii=False,
        )


@dataclass
class TokenizedRecord:
    """A validated, tokenized and truncated record."""
    id: str
    question: List[str]
    passages: List[List[str]]
    answer: List[str]
    truncated: Dict[str, int] = field(default_factory=dict, compare=False, repr=False)

    @property
    def num_passages(self) -> int:
        return len(self.passages)

    def to_record(self) -> DatasetRecord:
        return DatasetRecord(
            id=self.id,
            question=detokenize(self.question),
            passages=[detokenize(p) for p in self.passages],
            answer=detokenize(self.answer),
        )


def _require_text(obj: Dict[str, Any], name: str, line: int) -> str:
    value = obj[name]
    if not isinstance(value, str):
        raise ValidationError(f"expected a string, got {type(value).__name__}", line=line, field=name)
    if not value.strip():
        raise ValidationError("must not be empty", line=line, field=name)
    return value


def parse_record(obj: Any, line: int) -> DatasetRecord:
    """Check one decoded JSON object against the record schema."""
    if not isinstance(obj, dict):
        raise ValidationError("expected a JSON object", line=line)
    for name in REQUIRED_FIELDS:
        if name not in obj:
            raise ValidationError("missing required field", line=line, field=name)

    record_id = obj["id"]
    if not isinstance(record_id, (str, int)) or str(record_id) == "":
        raise ValidationError("must be a nonempty string", line=line, field="id")
    passages = obj["passages"]
    if not isinstance(passages, list) or not passages:
        raise ValidationError("must be a nonempty list of strings", line=line, field="passages")
    for i, passage in enumerate(passages):
        if not isinstance(passage, str) or not passage.strip():
            raise ValidationError(f"passage {i} must be a nonempty string", line=line, field="passages")

    return DatasetRecord(
        id=str(record_id),
        question=_require_text(obj, "question", line),
        passages=list(passages),
        answer=_require_text(obj, "answer", line),
    )


def tokenize_record(
    record: DatasetRecord,
    max_question_len: int,
    max_passage_len: int,
    max_answer_len: int,
    k_max: int,
    line: Optional[int] = None,
) -> TokenizedRecord:
    question = tokenize(record.question)
    passages = [tokenize(p) for p in record.passages]
    answer = tokenize(record.answer)
    for name, tokens in (("question", question), ("answer", answer)):
        if not tokens:
            raise ValidationError("has no tokens after tokenization", line=line, field=name)
    if any(not p for p in passages):
        raise ValidationError("a passage has no tokens after tokenization", line=line, field="passages")

    truncated = {
        "question": max(0, len(question) - max_question_len),
        "passages": sum(max(0, len(p) - max_passage_len) for p in passages[:k_max]),
        "answer": max(0, len(answer) - max_answer_len),
        "dropped_passages": max(0, len(passages) - k_max),
    }
    return TokenizedRecord(
        id=record.id,
        question=question[:max_question_len],
        passages=[p[:max_passage_len] for p in passages[:k_max]],
        answer=answer[:max_answer_len],
        truncated=truncated,
    )


def read_records(path: str) -> List[Tuple[int, DatasetRecord]]:
    if not os.path.isfile(path):
        raise ValidationError(f"dataset not found: {path}")
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as e:
                raise ValidationError(f"malformed JSON ({e.msg})", line=line_no) from e
            records.append((line_no, parse_record(obj, line_no)))
    return records


def ingest(
    path: str,
    max_question_len: int = 50,
    max_passage_len: int = 130,
    max_answer_len: int = 50,
    k_max: int = 3,
) -> List[TokenizedRecord]:
    """Load, validate, tokenize and truncate a JSONL dataset."""
    logger.info(f"Ingesting {path}")
    out: List[TokenizedRecord] = []
    for line_no, record in read_records(path):
        out.append(tokenize_record(record, max_question_len, max_passage_len, max_answer_len, k_max, line_no))

    if not out:
        raise ValidationError(f"dataset {path} holds no records")
    n_trunc = sum(1 for r in out if any(r.truncated.values()))
    if n_trunc:
        logger.warning(f"{n_trunc}/{len(out)} records were truncated or had passages beyond K_max dropped")
    logger.info(f"Ingested {len(out)} records from {path}")
    return out


def write_dataset(records: List, path: str) -> None:
    """Write DatasetRecords (or TokenizedRecords, detokenized) as JSONL."""
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            if isinstance(record, TokenizedRecord):
                record = record.to_record()
            f.write(record.to_json() + "\n")
    logger.info(f"Wrote {len(records)} records to {path}")
