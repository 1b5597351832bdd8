import argparse
import os
import sys
from dataclasses import asdict
from typing import List, Optional

import pandas as pd
from loguru import logger

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from common.log import setup_logging
from config.errors import ConfigError, GumMpError, IntegrityError, ValidationError, VersionError
from config.schema import TrainConfig
from config.settings import TRAIN_CONFIG
from data.dataset import ingest
from data.examples import build_examples, vocab_corpus
from data.synthetic import SyntheticTaskSpec, gen_synthetic
from numerics import set_debug
from training.ablation import run_ablation, summarize
from training.checkpoint import load_checkpoint
from training.inference import decode_examples, eval_negatives, evaluate_model, trace_rows, write_trace
from training.trainer import Trainer, model_from_checkpoint, saved_pool
from vocab import build_vocab, detokenize

DEFAULT_CHECKPOINT = TRAIN_CONFIG["checkpoint"]
USER_ERRORS = (ConfigError, ValidationError, VersionError, IntegrityError)


class GumMpArgumentParser(argparse.ArgumentParser):
    """Usage errors count as bad input and exit 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def load_config(args: argparse.Namespace) -> TrainConfig:
    """Flags over config file over preset over settings defaults."""
    config = TrainConfig.from_json(args.config) if args.config else TrainConfig()
    return config.override(
        seed=args.seed,
        ablation=getattr(args, "ablation", None),
        pam_width=getattr(args, "pam_width", None),
        epochs=getattr(args, "epochs", None),
    )


def ingest_for(config: TrainConfig, path: str):
    return ingest(path, config.max_question_len, config.max_passage_len, config.max_answer_len, config.k_max)


def cmd_train(args: argparse.Namespace) -> int:
    if args.resume:
        checkpoint = args.checkpoint or DEFAULT_CHECKPOINT
        ckpt = load_checkpoint(checkpoint)
        stored = TrainConfig.from_dict(ckpt.config)
        config = stored.override(epochs=args.epochs)
        _, _, vocab = model_from_checkpoint(ckpt)
        train = build_examples(ingest_for(config, args.data), vocab, config.decoder_vocab_size)
        dev = build_examples(ingest_for(config, args.dev_data), vocab, config.decoder_vocab_size) if args.dev_data else None
        trainer = Trainer.from_checkpoint(ckpt, train, dev, config=config)
    else:
        config = load_config(args)
        checkpoint = args.checkpoint or config.checkpoint or DEFAULT_CHECKPOINT
        config = config.override(checkpoint=checkpoint)
        records = ingest_for(config, args.data)
        vocab = build_vocab(vocab_corpus(records), config.vocab_size)
        logger.info(f"Vocabulary: {len(vocab)} tokens")
        train = build_examples(records, vocab, config.decoder_vocab_size)
        dev = build_examples(ingest_for(config, args.dev_data), vocab, config.decoder_vocab_size) if args.dev_data else None
        trainer = Trainer(config, vocab, train, dev)

    stats = trainer.fit(checkpoint)
    history_path = checkpoint + ".history.csv"
    pd.DataFrame([asdict(s) for s in stats]).to_csv(history_path, index=False)
    logger.info(f"Training finished: checkpoint {checkpoint}, history {history_path}")
    return 0


def _load_for_inference(args: argparse.Namespace):
    ckpt = load_checkpoint(args.checkpoint or DEFAULT_CHECKPOINT)
    model, config, vocab = model_from_checkpoint(ckpt)
    examples = build_examples(ingest_for(config, args.data), vocab, config.decoder_vocab_size)
    seed = config.seed if args.seed is None else args.seed
    negatives = eval_negatives(model, examples, seed, fallback=saved_pool(ckpt))
    return model, vocab, examples, negatives


def cmd_eval(args: argparse.Namespace) -> int:
    model, vocab, examples, negatives = _load_for_inference(args)
    report = evaluate_model(model, examples, vocab, negatives, args.beam_size, args.max_len, args.workers)
    logger.info(f"BLEU-1 {report.bleu1:.4f} | ROUGE-L {report.rouge_l:.4f} over {report.n_examples} examples")
    if args.output:
        report.save(args.output)
        logger.info(f"Report written to {args.output}")
    else:
        print(report.to_json())
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    model, vocab, examples, negatives = _load_for_inference(args)
    hyps = decode_examples(model, examples, negatives, args.beam_size, args.max_len, args.workers)
    output = args.output or "answers.txt"
    with open(output, "w", encoding="utf-8") as f:
        for ex, hyp in zip(examples, hyps):
            f.write(detokenize(ex.decode(hyp.tokens, vocab)) + "\n")
    logger.info(f"Wrote {len(hyps)} answers to {output}")

    rows = []
    for ex, neg, hyp in zip(examples, negatives, hyps):
        rows.extend(trace_rows(model, ex, neg, hyp, vocab))
    write_trace(rows, args.trace or output + ".trace.csv")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    spec = SyntheticTaskSpec(
        vocab_size=args.vocab_size,
        num_passages=args.passages,
        passage_len=args.passage_len,
        num_examples=args.num_examples,
        cooccurrence=args.cooccurrence,
        distractors=args.distractors,
        seed=args.seed if args.seed is not None else SyntheticTaskSpec.seed,
    )
    gen_synthetic(spec, args.output)
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    config = load_config(args)
    train = ingest_for(config, args.data)
    test = ingest_for(config, args.test_data)
    runs = run_ablation(
        config,
        train,
        test,
        seeds=args.seeds,
        modes=args.modes,
        pam_widths=args.pam_widths or (),
        beam_size=args.beam_size,
        max_len=args.max_len,
        workers=args.workers,
    )
    table = summarize(runs)
    os.makedirs(args.output_dir, exist_ok=True)
    runs.to_csv(os.path.join(args.output_dir, "ablation_runs.csv"), index=False)
    table.to_csv(os.path.join(args.output_dir, "ablation_summary.csv"), index=False)
    logger.info("Ablation summary:\n" + table.to_string(index=False))
    return 0


def build_parser() -> GumMpArgumentParser:
    parser = GumMpArgumentParser(description="Multi-passage answer generation with GUM-MP")
    parser.add_argument("--log-level", default=None, help="Console log level (default from GUMMP_LOG_LEVEL)")
    parser.add_argument("--debug", action="store_true", help="Check every op for NaN/Inf")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--data", type=str, required=True, help="JSONL dataset")
        p.add_argument("--checkpoint", type=str, help=f"Checkpoint path (default {DEFAULT_CHECKPOINT})")
        p.add_argument("--seed", type=int, default=None)

    def decoding(p, beam_default=20):
        p.add_argument("--beam-size", type=int, default=beam_default)
        p.add_argument("--max-len", type=int, default=50)
        p.add_argument("--workers", type=int, default=1, help="Parallel decoding threads")

    def variant(p):
        p.add_argument("--config", type=str, help="TrainConfig JSON file")
        p.add_argument("--ablation", type=str, choices=["full", "no-neg", "no-um", "mpqg"])
        p.add_argument("--pam-width", type=int, help="Alignment width L")
        p.add_argument("--epochs", type=int)

    p = sub.add_parser("train", help="Train a model")
    common(p)
    variant(p)
    p.add_argument("--dev-data", type=str, help="JSONL dev set scored after every epoch")
    p.add_argument("--resume", action="store_true", help="Continue from --checkpoint")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="Score a checkpoint on a dataset")
    common(p)
    decoding(p)
    p.add_argument("--output", type=str, help="Write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("generate", help="Write one answer per record plus a provenance trace")
    common(p)
    decoding(p)
    p.add_argument("--output", type=str, help="Answers file (default answers.txt)")
    p.add_argument("--trace", type=str, help="Trace CSV (default <output>.trace.csv)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("synth", help="Generate the synthetic correlated-entity task")
    p.add_argument("--output", type=str, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--num-examples", type=int, default=SyntheticTaskSpec.num_examples)
    p.add_argument("--passages", type=int, default=SyntheticTaskSpec.num_passages)
    p.add_argument("--passage-len", type=int, default=SyntheticTaskSpec.passage_len)
    p.add_argument("--cooccurrence", type=int, default=SyntheticTaskSpec.cooccurrence)
    p.add_argument("--distractors", type=int, default=SyntheticTaskSpec.distractors)
    p.add_argument("--vocab-size", type=int, default=SyntheticTaskSpec.vocab_size)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ablate", help="Compare ablation variants over several seeds")
    common(p)
    variant(p)
    decoding(p, beam_default=1)
    p.add_argument("--test-data", type=str, required=True)
    p.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--modes", type=str, nargs="+", default=["full", "no-neg", "no-um"])
    p.add_argument("--pam-widths", type=int, nargs="+", help="Extra full-model rows, one per L")
    p.add_argument("--output-dir", type=str, default="ablation")
    p.set_defaults(func=cmd_ablate)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging("gummp", args.log_level)
    if args.debug:
        set_debug(True)

    logger.info("=" * 60)
    logger.info(f"GUMMP {args.command.upper()}")
    logger.info("=" * 60)
    try:
        return args.func(args)
    except USER_ERRORS as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 1
    except GumMpError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 2
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
