"""
Training a labeler and reading its predictions
==============================================

Generates a small synthetic corpus, trains the ordinal head on it,
then prints the test-split report and per-word predictions next to
the gold labels.
"""

import json
import tempfile
from pathlib import Path

from wordimportance.cli import main as cli_main
from wordimportance.metrics import LABEL_NAMES, bin_score

root = Path(tempfile.mkdtemp(prefix="train_demo_"))

# 1. Data: 20 turns, fully determined by the seed.
rc = cli_main(["synth-data", "--out", str(root / "data"), "--n", "20", "--seed", "6"])
assert rc == 0
corpus = root / "data" / "corpus.jsonl"

# 2. Train the ordinal head. The corpus splits 80/10/10 into
# train/dev/test; early stopping watches the dev ordinal RMS. At this
# toy scale (one batch per epoch) the default lr would stall inside
# the patience window, so the demo runs a little hotter.
out = root / "run"
rc = cli_main(
    [
        "train",
        "--corpus", str(corpus),
        "--out", str(out),
        "--head", "ordinal",
        "--seed", "1",
        "--max-epochs", "60",
        "--lr", "0.005",
    ]
)
assert rc == 0

summary = json.loads((out / "train_summary.json").read_text())
trial = summary["per_trial"][0]
print(f"\nstopped after {trial['epochs_run']} epochs;"
      f" kept epoch {trial['best_epoch']}"
      f" (dev RMS {trial['best_dev_rms']:.2f})")
print(f"test split: acc {trial['test']['acc']:.1f},"
      f" macro F1 {trial['test']['macro_f1']:.1f},"
      f" RMS {trial['test']['rms']:.1f}")

# 3. Predict on the whole corpus and line predictions up with gold.
pred_path = root / "pred.jsonl"
rc = cli_main(
    [
        "predict",
        "--corpus", str(corpus),
        "--checkpoint", str(out / "checkpoint.json"),
        "--out", str(pred_path),
    ]
)
assert rc == 0

gold_by_id = {}
for line in corpus.read_text().splitlines():
    rec = json.loads(line)
    gold_by_id[rec["utterance_id"]] = [
        LABEL_NAMES[bin_score(w["score"])] for w in rec["words"]
    ]

print("\nfirst three turns, predicted vs gold:")
for line in pred_path.read_text().splitlines()[:3]:
    rec = json.loads(line)
    gold = gold_by_id[rec["utterance_id"]]
    print(f"\n  {rec['utterance_id']}")
    for token, pred, g in zip(rec["tokens"], rec["labels"], gold):
        marker = " " if pred == g else "*"
        print(f"   {marker} {token:10s} pred {pred}  gold {g}")
