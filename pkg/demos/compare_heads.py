"""
Three projection heads on the same features
===========================================

The encoder is shared; what differs is how 256 contextual dimensions
become a label. The softmax head treats LI/MI/HI as unordered classes,
the ordinal head as ordered thresholds, and the CRF head as a jointly
decoded label sequence. This script trains each on one corpus and
tabulates the test metrics.
"""

import json
import tempfile
from pathlib import Path

from wordimportance.cli import main as cli_main

root = Path(tempfile.mkdtemp(prefix="heads_demo_"))
rc = cli_main(["synth-data", "--out", str(root / "data"), "--n", "24", "--seed", "9"])
assert rc == 0
corpus = root / "data" / "corpus.jsonl"

rows = []
for head in ("softmax", "ordinal", "crf"):
    out = root / head
    rc = cli_main(
        [
            "train",
            "--corpus", str(corpus),
            "--out", str(out),
            "--head", head,
            "--seed", "2",
            "--max-epochs", "60",
            "--lr", "0.005",
        ]
    )
    assert rc == 0
    summary = json.loads((out / "train_summary.json").read_text())
    trial = summary["per_trial"][0]
    rows.append((head, trial["epochs_run"], trial["test"]))

print(f"\n{'head':10s} {'epochs':>6s} {'acc':>7s} {'macroF1':>8s} {'RMS':>7s}")
for head, epochs, test in rows:
    print(f"{head:10s} {epochs:6d} {test['acc']:7.1f}"
          f" {test['macro_f1']:8.1f} {test['rms']:7.1f}")

# On clean synthetic data every head should be near-perfect; the
# interesting differences (ordinal RMS winning on real conversational
# speech) need real annotated audio.
print("\nRMS counts a LI<->HI confusion four times harder than an"
      "\nadjacent miss, which is what the ordinal head optimizes for.")
