"""Scoring: bins, classification metrics, alignment, label projection, WER."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wordimportance.errors import DataError
from wordimportance.metrics import (
    HI,
    LI,
    MI,
    align_hypothesis,
    bin_score,
    metrics,
    project_labels,
    wer,
)

labels_list = st.lists(st.integers(min_value=0, max_value=2), min_size=1, max_size=40)


# ---------------------------------------------------------------- binning


def test_bin_ranges():
    assert bin_score(0.0) == LI
    assert bin_score(0.3) == MI
    assert bin_score(0.6) == HI
    assert bin_score(1.0) == HI


def test_bin_boundaries_from_below():
    assert bin_score(0.29999) == LI
    assert bin_score(0.59999) == MI


def test_bin_rejects_out_of_range():
    with pytest.raises(DataError):
        bin_score(1.2)
    with pytest.raises(DataError):
        bin_score(-0.01)


# ---------------------------------------------------------------- metrics


def test_perfect_predictions():
    rep = metrics([0, 1, 2, 1], [0, 1, 2, 1])
    assert rep.acc == 100.0
    assert rep.macro_f1 == 100.0
    assert rep.rms == 0.0
    assert rep.absent_classes == []


def test_three_word_example():
    rep = metrics([LI, MI, HI], [LI, LI, HI])
    assert rep.acc == pytest.approx(66.666666, abs=1e-4)
    assert rep.rms == pytest.approx(100.0 * math.sqrt(1.0 / 3.0), abs=1e-9)


def test_max_single_word_distance():
    rep = metrics([LI], [HI])
    assert rep.rms == pytest.approx(200.0)
    assert rep.acc == 0.0


def test_absent_class_flagged_and_scored_zero():
    rep = metrics([0, 0, 1], [0, 0, 1])
    assert rep.absent_classes == ["HI"]
    # two perfect classes, one absent: mean of (1, 1, 0) f1 values
    assert rep.macro_f1 == pytest.approx(100.0 * 2.0 / 3.0)


def test_confusion_orientation():
    rep = metrics([0, 0, 2], [1, 0, 2])
    assert rep.confusion[0][1] == 1  # gold LI predicted MI
    assert rep.confusion[0][0] == 1
    assert rep.confusion[2][2] == 1


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        metrics([0, 1], [0])


def test_empty_rejected():
    with pytest.raises(ValueError):
        metrics([], [])


@settings(deadline=None, max_examples=80)
@given(labels_list, st.randoms(use_true_random=False))
def test_metrics_permutation_invariant(gold, rnd):
    pred = [rnd.randint(0, 2) for _ in gold]
    order = list(range(len(gold)))
    rnd.shuffle(order)
    a = metrics(gold, pred)
    b = metrics([gold[i] for i in order], [pred[i] for i in order])
    assert a.acc == b.acc
    assert a.macro_f1 == b.macro_f1
    assert a.rms == b.rms
    assert a.confusion == b.confusion


@settings(deadline=None, max_examples=80)
@given(labels_list, st.randoms(use_true_random=False))
def test_rms_acc_consistency(gold, rnd):
    pred = [rnd.randint(0, 2) for _ in gold]
    rep = metrics(gold, pred)
    # every error contributes at least distance 1
    floor = 100.0 * math.sqrt(1.0 - rep.acc / 100.0)
    assert rep.rms >= floor - 1e-9
    assert (rep.rms == 0.0) == (rep.acc == 100.0)


def test_metrics_against_direct_formulas():
    rng = np.random.default_rng(99)
    for _ in range(200):
        n = int(rng.integers(1, 60))
        gold = rng.integers(0, 3, size=n).tolist()
        pred = rng.integers(0, 3, size=n).tolist()
        rep = metrics(gold, pred)

        acc = 100.0 * sum(g == p for g, p in zip(gold, pred)) / n
        rms = 100.0 * math.sqrt(sum((g - p) ** 2 for g, p in zip(gold, pred)) / n)
        f1s = []
        for c in range(3):
            tp = sum(1 for g, p in zip(gold, pred) if g == c and p == c)
            fp = sum(1 for g, p in zip(gold, pred) if g != c and p == c)
            fn = sum(1 for g, p in zip(gold, pred) if g == c and p != c)
            f1s.append(0.0 if tp + fp + fn == 0 else 200.0 * tp / (2 * tp + fp + fn))
        assert rep.acc == pytest.approx(acc, abs=1e-12)
        assert rep.rms == pytest.approx(rms, abs=1e-12)
        assert rep.macro_f1 == pytest.approx(sum(f1s) / 3.0, abs=1e-12)


# ---------------------------------------------------------------- alignment


def test_alignment_worked_example():
    ops = align_hypothesis(["a", "b", "c"], ["a", "x", "c", "d"])
    kinds = [op.kind for op in ops]
    assert kinds == ["match", "substitution", "match", "insertion"]
    assert wer(ops) == pytest.approx(2.0 / 3.0)


def test_alignment_identity():
    ops = align_hypothesis(["a", "b"], ["a", "b"])
    assert all(op.kind == "match" for op in ops)
    assert wer(ops) == 0.0


def test_alignment_empty_hyp_all_deletions():
    ops = align_hypothesis(["a", "b", "c"], [])
    assert [op.kind for op in ops] == ["deletion"] * 3
    assert wer(ops) == 1.0


def test_alignment_empty_ref_wer_undefined():
    ops = align_hypothesis([], ["a"])
    with pytest.raises(DataError):
        wer(ops)


def test_wer_single_insertion():
    ops = align_hypothesis(["a", "b", "c", "d"], ["a", "b", "c", "d", "e"])
    assert wer(ops) == pytest.approx(1.0 / 4.0)


def _lev_cost(a, b):
    m = len(b)
    prev = list(range(m + 1))
    for i, x in enumerate(a, 1):
        cur = [i] + [0] * m
        for j, y in enumerate(b, 1):
            cur[j] = min(prev[j - 1] + (x != y), prev[j] + 1, cur[j - 1] + 1)
        prev = cur
    return prev[m]


def test_alignment_cost_exhaustive_short():
    # every pair over a 3-symbol alphabet up to length 4 (the full
    # length-6 sweep runs in the acceptance suite)
    seqs = []
    for L in range(0, 5):
        seqs.extend(list(p) for p in itertools.product("abc", repeat=L))
    for r in seqs:
        for h in seqs:
            ops = align_hypothesis(r, h)
            assert sum(1 for op in ops if op.kind != "match") == _lev_cost(r, h)


def test_alignment_indices_are_consistent():
    rng = np.random.default_rng(17)
    sigma = ["a", "b", "c"]
    for _ in range(60):
        r = [sigma[i] for i in rng.integers(0, 3, size=rng.integers(0, 8))]
        h = [sigma[i] for i in rng.integers(0, 3, size=rng.integers(0, 8))]
        ops = align_hypothesis(r, h)
        ref_seen = [op.ref_index for op in ops if op.ref_index is not None]
        hyp_seen = [op.hyp_index for op in ops if op.hyp_index is not None]
        assert ref_seen == list(range(len(r)))
        assert hyp_seen == list(range(len(h)))


# ---------------------------------------------------------------- projection


def test_projection_identity_on_matches():
    ops = align_hypothesis(["a", "b"], ["a", "b"])
    g, p = project_labels(ops, [HI, LI], [MI, MI])
    assert g == [HI, LI]
    assert p == [MI, MI]


def test_projection_insertion_counts_against_li():
    ops = align_hypothesis(["a"], ["a", "b"])
    g, p = project_labels(ops, [MI], [MI, HI])
    assert g == [MI, LI]
    assert p == [MI, HI]


def test_projection_insertions_can_be_skipped():
    ops = align_hypothesis(["a"], ["a", "b"])
    g, p = project_labels(ops, [MI], [MI, HI], include_insertions=False)
    assert g == [MI]
    assert p == [MI]


def test_projection_deletion_scores_li():
    ops = align_hypothesis(["a", "b"], ["a"])
    g, p = project_labels(ops, [MI, HI], [MI])
    assert g == [MI, HI]
    assert p == [MI, LI]


def test_projection_rejects_short_label_lists():
    ops = align_hypothesis(["a", "b"], ["a", "b"])
    with pytest.raises(DataError):
        project_labels(ops, [0], [0, 0])
