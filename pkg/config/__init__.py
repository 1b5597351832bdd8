from .settings import (
    MODEL_CONFIG,
    TRAIN_CONFIG,
    DATA_CONFIG,
    LOG_CONFIG,
    NUMERICS_CONFIG,
    PRESETS,
)
from .schema import ModelConfig, TrainConfig, ABLATION_MODES, normalize_ablation

__all__ = [
    "MODEL_CONFIG",
    "TRAIN_CONFIG",
    "DATA_CONFIG",
    "LOG_CONFIG",
    "NUMERICS_CONFIG",
    "PRESETS",
    "ModelConfig",
    "TrainConfig",
    "ABLATION_MODES",
    "normalize_ablation",
]
