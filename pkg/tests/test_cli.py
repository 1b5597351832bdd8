import json

import pandas as pd
import pytest
from loguru import logger

from gummp import main
from training.checkpoint import load_checkpoint
from training.inference import TRACE_COLUMNS

SYNTH = [
    "synth", "--output", "data.jsonl", "--vocab-size", "40", "--passages", "2", "--passage-len", "8",
    "--num-examples", "6", "--cooccurrence", "2", "--distractors", "1",
]


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "config.json").write_text(json.dumps({"preset": "desk", "epochs": 1, "batch_size": 4}))
    yield tmp_path
    logger.remove()


def test_synth_train_eval_generate(workdir):
    assert main(SYNTH) == 0
    assert len((workdir / "data.jsonl").read_text().splitlines()) == 6

    assert main(["train", "--data", "data.jsonl", "--config", "config.json", "--checkpoint", "model.ckpt"]) == 0
    assert (workdir / "model.ckpt").exists()
    assert (workdir / "model.ckpt.vocab").exists()
    history = pd.read_csv(workdir / "model.ckpt.history.csv")
    assert history["epoch"].tolist() == [1]

    assert main(["train", "--data", "data.jsonl", "--checkpoint", "model.ckpt", "--resume", "--epochs", "2"]) == 0
    ckpt = load_checkpoint(str(workdir / "model.ckpt"))
    assert ckpt.epoch == 2
    assert len(ckpt.history) == 2

    decoding = ["--beam-size", "2", "--max-len", "4", "--workers", "2"]
    assert main(["eval", "--data", "data.jsonl", "--checkpoint", "model.ckpt", *decoding, "--output", "report.json"]) == 0
    report = json.loads((workdir / "report.json").read_text())
    assert report["n_examples"] == 6
    assert 0.0 <= report["bleu1"] <= 1.0

    assert main(["generate", "--data", "data.jsonl", "--checkpoint", "model.ckpt", *decoding, "--output", "answers.txt"]) == 0
    assert len((workdir / "answers.txt").read_text().splitlines()) == 6
    trace = pd.read_csv(workdir / "answers.txt.trace.csv")
    assert list(trace.columns) == TRACE_COLUMNS
    assert set(trace["passage"]) <= {0, 1}


def test_missing_checkpoint(workdir):
    assert main(SYNTH) == 0
    assert main(["eval", "--data", "data.jsonl", "--checkpoint", "absent.ckpt"]) == 1


def test_bad_record(workdir):
    (workdir / "bad.jsonl").write_text(json.dumps({"id": "1", "question": "q ?", "passages": ["p"]}) + "\n")
    assert main(["train", "--data", "bad.jsonl", "--config", "config.json"]) == 1


def test_unknown_preset(workdir):
    assert main(SYNTH) == 0
    (workdir / "config.json").write_text(json.dumps({"preset": "nope"}))
    assert main(["train", "--data", "data.jsonl", "--config", "config.json"]) == 1


def test_infeasible_synthetic_task(workdir):
    assert main(["synth", "--output", "x.jsonl", "--passages", "2", "--cooccurrence", "3"]) == 1


@pytest.mark.parametrize("command", ["eval", "generate"])
def test_single_question_dataset_uses_the_saved_pool(workdir, command):
    assert main(SYNTH) == 0
    assert main(["train", "--data", "data.jsonl", "--config", "config.json", "--checkpoint", "model.ckpt"]) == 0
    first = (workdir / "data.jsonl").read_text().splitlines()[0]
    (workdir / "one.jsonl").write_text(first + "\n")
    args = ["--data", "one.jsonl", "--checkpoint", "model.ckpt", "--beam-size", "1", "--max-len", "3"]
    assert main([command, *args, "--output", "out.txt"]) == 0
    if command == "generate":
        assert len((workdir / "out.txt").read_text().splitlines()) == 1
    else:
        assert json.loads((workdir / "out.txt").read_text())["n_examples"] == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["train", "--data", "data.jsonl", "--ablation", "bogus"],
        ["train", "--config", "config.json"],
        ["synth", "--output", "x.jsonl", "--passages", "two"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_one(workdir, argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 1
