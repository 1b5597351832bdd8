"""Ablation switches and the multi-seed comparison runner."""
from dataclasses import dataclass
from typing import List, Optional, Sequence

import pandas as pd
from loguru import logger

from config.schema import TrainConfig, normalize_ablation
from data.dataset import TokenizedRecord
from data.examples import build_examples, vocab_corpus
from training.trainer import Trainer
from vocab import build_vocab

VARIANT_NAMES = {
    "full": "GUM-MP",
    "no_neg": "w/o Neg",
    "no_um": "w/o UM",
    "mpqg": "MPQG",
}


def apply_ablation(mode: str, config: TrainConfig) -> TrainConfig:
    """Config for one variant.

    no_neg drops the matching tensor (single-argument matching, negatives unused);
    no_um has the decoder attend over the MPMs directly; mpqg does both.
    """
    return config.override(ablation=normalize_ablation(mode))


@dataclass
class Variant:
    name: str
    config: TrainConfig


def ablation_variants(
    base: TrainConfig, modes: Sequence[str] = ("full", "no_neg", "no_um"), pam_widths: Sequence[int] = ()
) -> List[Variant]:
    variants = [Variant(VARIANT_NAMES[normalize_ablation(m)], apply_ablation(m, base)) for m in modes]
    for width in pam_widths:
        variants.append(Variant(f"UM({width})", apply_ablation("full", base).override(pam_width=int(width))))
    return variants


def run_ablation(
    base: TrainConfig,
    train_records: Sequence[TokenizedRecord],
    test_records: Sequence[TokenizedRecord],
    seeds: Sequence[int],
    modes: Sequence[str] = ("full", "no_neg", "no_um"),
    pam_widths: Sequence[int] = (),
    beam_size: int = 1,
    max_len: Optional[int] = None,
    workers: int = 1,
) -> pd.DataFrame:
    """Train and score every variant under every seed; one row per run."""
    vocab = build_vocab(vocab_corpus(train_records), base.vocab_size)
    train = build_examples(train_records, vocab, base.decoder_vocab_size)
    test = build_examples(test_records, vocab, base.decoder_vocab_size)

    rows = []
    for variant in ablation_variants(base, modes, pam_widths):
        for seed in seeds:
            config = variant.config.override(seed=int(seed))
            logger.info(f"Ablation run: {variant.name}, seed {seed}")
            trainer = Trainer(config, vocab, train)
            trainer.fit()
            report = trainer.evaluate(test, beam_size=beam_size, max_len=max_len, workers=workers)
            rows.append(
                {
                    "variant": variant.name,
                    "ablation": config.ablation,
                    "pam_width": config.pam_width,
                    "seed": int(seed),
                    "final_loss": trainer.history[-1] if trainer.history else float("nan"),
                    "bleu1": report.bleu1,
                    "rougeL": report.rouge_l,
                }
            )
    return pd.DataFrame(rows)


def summarize(runs: pd.DataFrame) -> pd.DataFrame:
    """Mean and standard deviation per variant, in run order."""
    order = list(dict.fromkeys(runs["variant"]))
    table = runs.groupby("variant", sort=False).agg(
        bleu1=("bleu1", "mean"),
        bleu1_std=("bleu1", "std"),
        rougeL=("rougeL", "mean"),
        rougeL_std=("rougeL", "std"),
        seeds=("seed", "count"),
    )
    return table.reindex(order).reset_index()
