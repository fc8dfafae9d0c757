"""Linear-chain CRF against closed forms and brute-force enumeration."""

import itertools
import math

import numpy as np

from wordimportance.crf import (
    crf_log_partition,
    crf_marginals,
    crf_viterbi,
    path_score,
)


def _brute_log_partition(emissions, trans, start, end):
    T, L = emissions.shape
    scores = []
    for path in itertools.product(range(L), repeat=T):
        scores.append(path_score(emissions, trans, start, end, path))
    m = max(scores)
    return m + math.log(sum(math.exp(s - m) for s in scores))


def _brute_viterbi(emissions, trans, start, end):
    T, L = emissions.shape
    best, best_score = None, -math.inf
    for path in itertools.product(range(L), repeat=T):
        s = path_score(emissions, trans, start, end, path)
        # strictly-greater keeps the lexicographically smallest argmax,
        # matching the decoder's tie rule (lower label wins)
        if s > best_score + 1e-12:
            best, best_score = path, s
    return list(best)


def test_partition_single_step_closed_form():
    em = np.array([[1.0, 2.0, 3.0]])
    zeros = np.zeros((3, 3))
    z = crf_log_partition(em, zeros, np.zeros(3), np.zeros(3))
    expect = math.log(math.exp(1) + math.exp(2) + math.exp(3))
    assert abs(z - expect) < 1e-12


def test_partition_all_zero_params():
    em = np.zeros((3, 3))
    z = crf_log_partition(em, np.zeros((3, 3)), np.zeros(3), np.zeros(3))
    assert abs(z - math.log(27.0)) < 1e-12


def test_viterbi_follows_dominant_emissions():
    em = np.array([[9.0, 0.0, 0.0], [0.0, 9.0, 0.0], [0.0, 0.0, 9.0]])
    path = crf_viterbi(em, np.zeros((3, 3)), np.zeros(3), np.zeros(3))
    assert list(path) == [0, 1, 2]


def test_viterbi_all_zero_ties_to_lowest_label():
    em = np.zeros((4, 3))
    path = crf_viterbi(em, np.zeros((3, 3)), np.zeros(3), np.zeros(3))
    assert list(path) == [0, 0, 0, 0]


def test_brute_force_agreement_100_cases():
    rng = np.random.default_rng(1234)
    for case in range(100):
        T = int(rng.integers(1, 7))
        em = rng.normal(size=(T, 3)) * 2.0
        trans = rng.normal(size=(3, 3))
        start = rng.normal(size=3)
        end = rng.normal(size=3)

        z = crf_log_partition(em, trans, start, end)
        z_brute = _brute_log_partition(em, trans, start, end)
        assert abs(z - z_brute) < 1e-8, f"case {case}: partition mismatch"

        path = crf_viterbi(em, trans, start, end)
        assert list(path) == _brute_viterbi(em, trans, start, end), f"case {case}"


def test_marginals_sum_to_one_per_step():
    rng = np.random.default_rng(7)
    em = rng.normal(size=(5, 3))
    trans = rng.normal(size=(3, 3))
    start, end = rng.normal(size=3), rng.normal(size=3)
    _, unary, pairwise = crf_marginals(em, trans, start, end)
    assert np.allclose(unary.sum(axis=1), 1.0, atol=1e-10)
    # pairwise sums count T-1 transitions in total
    assert abs(pairwise.sum() - 4.0) < 1e-10


def test_marginals_match_brute_force():
    rng = np.random.default_rng(21)
    em = rng.normal(size=(4, 3))
    trans = rng.normal(size=(3, 3))
    start, end = rng.normal(size=3), rng.normal(size=3)
    log_z, unary, _ = crf_marginals(em, trans, start, end)

    probs = np.zeros((4, 3))
    for path in itertools.product(range(3), repeat=4):
        p = math.exp(path_score(em, trans, start, end, path) - log_z)
        for t, y in enumerate(path):
            probs[t, y] += p
    assert np.allclose(unary, probs, atol=1e-10)
