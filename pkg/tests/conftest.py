"""Shared fixtures: a small synthetic corpus and one quick trained run.

Both are session-scoped; unit tests that need a checkpoint reuse the
same artifacts instead of retraining.
"""

import json

import pytest

from wordimportance.cli import main as cli_main
from wordimportance.synth import synth_corpus


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """12 utterances, seed 3: enough for split/evaluate plumbing."""
    root = tmp_path_factory.mktemp("corpus12")
    utts, path = synth_corpus(root, 12, seed=3)
    return {"dir": root, "path": path, "utts": utts}


@pytest.fixture(scope="session")
def quick_run(small_corpus, tmp_path_factory):
    """An ordinal-head training run on the small corpus (abbreviated)."""
    out = tmp_path_factory.mktemp("run")
    rc = cli_main(
        [
            "train",
            "--corpus", str(small_corpus["path"]),
            "--out", str(out),
            "--head", "ordinal",
            "--seed", "1",
            "--max-epochs", "10",
        ]
    )
    assert rc == 0
    summary = json.loads((out / "train_summary.json").read_text())
    return {
        "dir": out,
        "checkpoint": out / "checkpoint.json",
        "summary": summary,
        "corpus": small_corpus,
    }
