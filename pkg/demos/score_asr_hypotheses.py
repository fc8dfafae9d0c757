"""
Scoring predictions on errorful ASR transcripts
===============================================

Real systems label words that a recognizer emitted, not the reference
transcript. This script corrupts reference tokens into a plausible
hypothesis file (substitutions, deletions, insertions), then scores a
trained model on it: hypothesis words are aligned to reference words
by minimum edit distance, labels are projected across the alignment,
and WER is reported next to the label metrics.
"""

import json
import random
import tempfile
from pathlib import Path

from wordimportance.cli import main as cli_main

root = Path(tempfile.mkdtemp(prefix="asr_demo_"))
rc = cli_main(["synth-data", "--out", str(root / "data"), "--n", "20", "--seed", "13"])
assert rc == 0
corpus = root / "data" / "corpus.jsonl"

out = root / "run"
rc = cli_main(
    [
        "train",
        "--corpus", str(corpus),
        "--out", str(out),
        "--seed", "3",
        "--max-epochs", "60",
        "--lr", "0.005",  # toy-scale corpus, see train_and_predict.py
    ]
)
assert rc == 0
checkpoint = out / "checkpoint.json"

# Corrupt the reference tokens: each word is deleted with p=0.08,
# substituted with p=0.12, and an extra token appears after with
# p=0.08. Word timings are dropped with the words, so the corrupted
# entries carry no times and the turn's speech span is divided evenly.
rng = random.Random(5)
hyp_path = root / "hyp.jsonl"
with open(hyp_path, "w") as fh:
    for line in corpus.read_text().splitlines():
        rec = json.loads(line)
        hyp_tokens = []
        for w in rec["words"]:
            roll = rng.random()
            if roll < 0.08:
                continue  # deletion
            hyp_tokens.append("uh" if roll < 0.20 else w["token"])
            if rng.random() < 0.08:
                hyp_tokens.append("um")  # insertion
        fh.write(json.dumps({"utterance_id": rec["utterance_id"],
                             "hyp_tokens": hyp_tokens}) + "\n")

# Score against the reference-word labels three ways.
def run(extra, title):
    print(f"\n== {title}")
    rc = cli_main(
        [
            "align-eval",
            "--corpus", str(corpus),
            "--checkpoint", str(checkpoint),
            "--hyp", str(hyp_path),
        ]
        + extra
    )
    assert rc == 0

print("reference-transcript score for comparison:")
rc = cli_main(["evaluate", "--corpus", str(corpus), "--checkpoint", str(checkpoint)])
assert rc == 0

run([], "errorful hypothesis, insertions scored (they count as gold LI)")
run(["--exclude-insertions"], "errorful hypothesis, insertions dropped")

print(
    "\nDeleted reference words are scored as if predicted LI, so label"
    "\nmetrics degrade with WER even when every surviving word is right."
)
