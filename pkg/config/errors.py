"""Exception hierarchy shared by every package."""
from typing import Optional, Sequence


class GumMpError(Exception):
    """Base class for all errors raised by this project."""


class ConfigError(GumMpError):
    """Invalid or inconsistent configuration."""


class ValidationError(GumMpError):
    """Malformed input data; carries the offending line and field when known."""

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class DimensionError(GumMpError):
    """Operand shapes do not agree."""

    def __init__(self, op: str, *shapes: Sequence[int]):
        self.op = op
        self.shapes = [tuple(s) for s in shapes]
        described = " vs ".join(str(s) for s in self.shapes)
        super().__init__(f"{op}: incompatible shapes {described}")


class DegenerateInputError(GumMpError):
    """Input has no usable support (empty sequence, everything masked, K=0)."""


class ContractError(GumMpError):
    """A caller broke an API precondition."""


class NumericError(GumMpError):
    """Non-finite values detected."""

    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class IntegrityError(GumMpError):
    """Checkpoint file is truncated or fails its checksum."""


class VersionError(GumMpError):
    """Checkpoint format version or shapes do not match the running config."""
