"""Label binning, classification metrics, and ASR-hypothesis alignment.

Labels are ordinal: LI=0 < MI=1 < HI=2.  Metrics are reported x100.
Counting uses plain integers so results are exactly reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DataError
from .net import LABEL_NAMES

NUM_LABELS = 3
LI, MI, HI = 0, 1, 2


def bin_score(score: float) -> int:
    """[0, 0.3) -> LI, [0.3, 0.6) -> MI, [0.6, 1] -> HI."""
    if not 0.0 <= score <= 1.0:
        raise DataError(f"score {score} outside [0, 1]")
    if score < 0.3:
        return LI
    if score < 0.6:
        return MI
    return HI


@dataclass
class MetricsReport:
    acc: float
    macro_f1: float
    rms: float
    confusion: list[list[int]]  # rows gold, cols predicted
    n_words: int
    absent_classes: list[str]
    wer: float | None = None

    def to_dict(self) -> dict:
        d = {
            "acc": self.acc,
            "macro_f1": self.macro_f1,
            "rms": self.rms,
            "confusion": self.confusion,
            "n_words": self.n_words,
            "absent_classes": self.absent_classes,
        }
        if self.wer is not None:
            d["wer"] = self.wer
        return d


def metrics(gold, pred) -> MetricsReport:
    """ACC, macro-F1, ordinal RMS (all x100) plus the confusion matrix.

    A class absent from both gold and pred contributes F1 = 0 and is
    listed in absent_classes.
    """
    gold = [int(g) for g in gold]
    pred = [int(p) for p in pred]
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} gold labels vs {len(pred)} predictions")
    if not gold:
        raise ValueError("metrics need at least one (gold, pred) pair")
    conf = [[0] * NUM_LABELS for _ in range(NUM_LABELS)]
    sq_err = 0
    for g, p in zip(gold, pred):
        conf[g][p] += 1
        sq_err += (g - p) * (g - p)
    n = len(gold)
    correct = sum(conf[c][c] for c in range(NUM_LABELS))

    f1_sum = 0.0
    absent: list[str] = []
    for c in range(NUM_LABELS):
        tp = conf[c][c]
        fp = sum(conf[g][c] for g in range(NUM_LABELS)) - tp
        fn = sum(conf[c][p] for p in range(NUM_LABELS)) - tp
        if tp + fp + fn == 0:
            absent.append(LABEL_NAMES[c])
        else:
            f1_sum += 2 * tp / (2 * tp + fp + fn)
    return MetricsReport(
        acc=100.0 * correct / n,
        macro_f1=100.0 * f1_sum / NUM_LABELS,
        rms=100.0 * math.sqrt(sq_err / n),
        confusion=conf,
        n_words=n,
        absent_classes=absent,
    )


@dataclass(frozen=True)
class AlignmentOp:
    kind: str  # match | substitution | insertion | deletion
    ref_index: int | None
    hyp_index: int | None


def align_hypothesis(ref: list[str], hyp: list[str]) -> list[AlignmentOp]:
    """Minimum-edit alignment with unit costs.

    Traceback ties prefer match > substitution > deletion > insertion,
    so the alignment is deterministic.
    """
    n, m = len(ref), len(hyp)
    cost = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        cost[i][0] = i
    for j in range(1, m + 1):
        cost[0][j] = j
    for i in range(1, n + 1):
        ref_i = ref[i - 1]
        row = cost[i]
        prev = cost[i - 1]
        for j in range(1, m + 1):
            same = ref_i == hyp[j - 1]
            best = prev[j - 1] + (0 if same else 1)
            if prev[j] + 1 < best:
                best = prev[j] + 1
            if row[j - 1] + 1 < best:
                best = row[j - 1] + 1
            row[j] = best

    ops: list[AlignmentOp] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and cost[i][j] == cost[i - 1][j - 1]:
            ops.append(AlignmentOp("match", i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and cost[i][j] == cost[i - 1][j - 1] + 1:
            ops.append(AlignmentOp("substitution", i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and cost[i][j] == cost[i - 1][j] + 1:
            ops.append(AlignmentOp("deletion", i - 1, None))
            i = i - 1
        else:
            ops.append(AlignmentOp("insertion", None, j - 1))
            j = j - 1
    ops.reverse()
    return ops


def project_labels(
    alignment: list[AlignmentOp],
    gold: list[int],
    pred: list[int],
    include_insertions: bool = True,
) -> tuple[list[int], list[int]]:
    """Paired (gold, pred) labels per aligned position.

    Matches and substitutions pair gold[ref] with pred[hyp]; an
    inserted hypothesis word counts against a gold of LI; a deleted
    reference word was never captioned, so its prediction scores as LI.
    """
    g_out: list[int] = []
    p_out: list[int] = []
    for op in alignment:
        if op.kind in ("match", "substitution"):
            if op.ref_index >= len(gold) or op.hyp_index >= len(pred):
                raise DataError("alignment indices outside the label lists")
            g_out.append(gold[op.ref_index])
            p_out.append(pred[op.hyp_index])
        elif op.kind == "insertion":
            if op.hyp_index >= len(pred):
                raise DataError("alignment indices outside the label lists")
            if include_insertions:
                g_out.append(LI)
                p_out.append(pred[op.hyp_index])
        elif op.kind == "deletion":
            if op.ref_index >= len(gold):
                raise DataError("alignment indices outside the label lists")
            g_out.append(gold[op.ref_index])
            p_out.append(LI)
        else:
            raise DataError(f"unknown alignment op {op.kind!r}")
    return g_out, p_out


def wer(alignment: list[AlignmentOp]) -> float:
    """(substitutions + insertions + deletions) / reference length."""
    n_ref = sum(1 for op in alignment if op.ref_index is not None)
    if n_ref == 0:
        raise DataError("WER needs a non-empty reference")
    errors = sum(1 for op in alignment if op.kind != "match")
    return errors / n_ref
