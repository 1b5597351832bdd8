"""Configuration settings for the GUM-MP answer generator."""
import os
from dotenv import load_dotenv

load_dotenv()

# Model architecture
MODEL_CONFIG = {
    "embed_dim": int(os.getenv("GUMMP_EMBED_DIM", "300")),
    "perspectives": 5,
    "pam_width": 10,
    "k_max": 3,
    "decoder_hidden": None,  # None -> same as embed_dim
}

# Training
TRAIN_CONFIG = {
    "learning_rate": 0.0005,
    "epochs": 30,
    "batch_size": 32,
    "seed": int(os.getenv("GUMMP_SEED", "1234")),
    "ablation": "full",
    "beam_size": 20,
    "dev_beam_size": 1,
    "clip_norm": 5.0,
    "adam_beta1": 0.9,
    "adam_beta2": 0.999,
    "adam_eps": 1e-8,
    "resample_negatives": True,
    "checkpoint": os.getenv("GUMMP_CHECKPOINT", "checkpoints/gummp.ckpt"),
}

# Data: truncation lengths and vocabulary caps
DATA_CONFIG = {
    "max_question_len": 50,
    "max_passage_len": 130,
    "max_answer_len": 50,
    "vocab_size": 50000,
    "decoder_vocab_size": None,  # None -> unrestricted
}

# Logging
LOG_CONFIG = {
    "level": os.getenv("GUMMP_LOG_LEVEL", "INFO"),
    "log_dir": os.getenv("GUMMP_LOG_DIR", "logs"),
}

# Numerics
NUMERICS_CONFIG = {
    "debug": os.getenv("GUMMP_DEBUG", "false").lower() == "true",
    "log_floor": 1e-12,
    "cosine_eps": 1e-12,
}

# Presets layered under a config file
PRESETS = {
    "ms-marco": {
        "embed_dim": 300,
        "perspectives": 5,
        "pam_width": 10,
        "max_question_len": 50,
        "max_passage_len": 130,
        "max_answer_len": 50,
        "decoder_vocab_size": 5000,
    },
    "oshiete-goo": {
        "embed_dim": 300,
        "perspectives": 5,
        "pam_width": 30,
        "k_max": 3,
        "max_question_len": 300,
        "max_passage_len": 300,
        "max_answer_len": 50,
        "decoder_vocab_size": None,
    },
    "desk": {
        "embed_dim": 16,
        "perspectives": 5,
        "pam_width": 10,
        "k_max": 3,
        "max_question_len": 12,
        "max_passage_len": 24,
        "max_answer_len": 8,
        "vocab_size": 256,
        "learning_rate": 0.01,
        "batch_size": 8,
    },
}
