"""Typed configuration objects and their canonical JSON form."""
import json
from dataclasses import dataclass, fields, asdict, replace
from typing import Any, Dict, Optional

from config.errors import ConfigError
from config.settings import MODEL_CONFIG, TRAIN_CONFIG, DATA_CONFIG, PRESETS

ABLATION_MODES = ("full", "no_neg", "no_um", "mpqg")


def normalize_ablation(mode: str) -> str:
    """Accept CLI spellings such as 'no-um'."""
    name = mode.strip().lower().replace("-", "_")
    if name not in ABLATION_MODES:
        raise ConfigError(f"unknown ablation mode '{mode}', expected one of {ABLATION_MODES}")
    return name


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass(frozen=True)
class ModelConfig:
    """Architecture handed to the model; every width derives from these."""
    vocab_size: int
    embed_dim: int
    perspectives: int
    pam_width: int
    k_max: int
    n_max: int
    decoder_hidden: int
    decoder_vocab_size: int
    ablation: str = "full"

    @property
    def uses_negatives(self) -> bool:
        return self.ablation in ("full", "no_um")

    @property
    def uses_unified_memory(self) -> bool:
        return self.ablation in ("full", "no_neg")

    @property
    def mpm_width(self) -> int:
        return 2 * (self.embed_dim + self.perspectives)

    @property
    def memory_width(self) -> int:
        if self.uses_unified_memory:
            return self.mpm_width + self.pam_width
        return self.mpm_width

    @property
    def feature_width(self) -> int:
        return self.decoder_hidden + self.memory_width + self.mpm_width

    @property
    def decoder_input_width(self) -> int:
        return self.embed_dim + self.memory_width + self.mpm_width

    @property
    def pam_rows(self) -> int:
        return (self.k_max - 1) * self.n_max


@dataclass
class TrainConfig:
    # model
    embed_dim: int = MODEL_CONFIG["embed_dim"]
    perspectives: int = MODEL_CONFIG["perspectives"]
    pam_width: int = MODEL_CONFIG["pam_width"]
    k_max: int = MODEL_CONFIG["k_max"]
    decoder_hidden: Optional[int] = MODEL_CONFIG["decoder_hidden"]
    # data
    max_question_len: int = DATA_CONFIG["max_question_len"]
    max_passage_len: int = DATA_CONFIG["max_passage_len"]
    max_answer_len: int = DATA_CONFIG["max_answer_len"]
    vocab_size: int = DATA_CONFIG["vocab_size"]
    decoder_vocab_size: Optional[int] = DATA_CONFIG["decoder_vocab_size"]
    # training
    learning_rate: float = TRAIN_CONFIG["learning_rate"]
    epochs: int = TRAIN_CONFIG["epochs"]
    batch_size: int = TRAIN_CONFIG["batch_size"]
    seed: int = TRAIN_CONFIG["seed"]
    ablation: str = TRAIN_CONFIG["ablation"]
    beam_size: int = TRAIN_CONFIG["beam_size"]
    dev_beam_size: int = TRAIN_CONFIG["dev_beam_size"]
    clip_norm: float = TRAIN_CONFIG["clip_norm"]
    adam_beta1: float = TRAIN_CONFIG["adam_beta1"]
    adam_beta2: float = TRAIN_CONFIG["adam_beta2"]
    adam_eps: float = TRAIN_CONFIG["adam_eps"]
    resample_negatives: bool = TRAIN_CONFIG["resample_negatives"]
    checkpoint: Optional[str] = TRAIN_CONFIG["checkpoint"]
    preset: Optional[str] = None

    def __post_init__(self):
        self.ablation = normalize_ablation(self.ablation)
        self.validate()

    def validate(self) -> None:
        positive = [
            "embed_dim", "perspectives", "pam_width", "k_max", "max_question_len",
            "max_passage_len", "max_answer_len", "epochs", "batch_size", "beam_size",
            "dev_beam_size",
        ]
        for name in positive:
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        for name in ["learning_rate", "clip_norm", "adam_eps"]:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not (0.0 <= self.adam_beta1 < 1.0 and 0.0 <= self.adam_beta2 < 1.0):
            raise ConfigError("adam betas must lie in [0, 1)")
        if self.vocab_size < 5:
            raise ConfigError(f"vocab_size must be at least 5, got {self.vocab_size}")
        if self.decoder_hidden is not None and self.decoder_hidden < 1:
            raise ConfigError("decoder_hidden must be positive")
        if self.decoder_vocab_size is not None and self.decoder_vocab_size < 5:
            raise ConfigError("decoder_vocab_size must be at least 5")

    def model_config(self, vocab_size: int) -> ModelConfig:
        """Freeze the architecture for a vocabulary of the given size."""
        decoder_vocab = vocab_size
        if self.decoder_vocab_size is not None:
            decoder_vocab = min(self.decoder_vocab_size, vocab_size)
        return ModelConfig(
            vocab_size=vocab_size,
            embed_dim=self.embed_dim,
            perspectives=self.perspectives,
            pam_width=self.pam_width,
            k_max=self.k_max,
            n_max=self.max_passage_len,
            decoder_hidden=self.decoder_hidden or self.embed_dim,
            decoder_vocab_size=decoder_vocab,
            ablation=self.ablation,
        )

    def override(self, **changes: Any) -> "TrainConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        merged: Dict[str, Any] = {}
        preset = data.get("preset")
        if preset is not None:
            if preset not in PRESETS:
                raise ConfigError(f"unknown preset '{preset}', expected one of {sorted(PRESETS)}")
            merged.update(PRESETS[preset])
        merged.update(data)
        try:
            return cls(**merged)
        except TypeError as e:
            raise ConfigError(str(e)) from e

    @classmethod
    def from_json(cls, path: str) -> "TrainConfig":
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except FileNotFoundError as e:
            raise ConfigError(f"config file not found: {path}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        return cls.from_dict(data)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json())
