"""Linear-chain CRF: log-partition, marginals, Viterbi.

Path score for labels y over T steps:
  start[y_1] + sum_t emissions[t][y_t] + sum_t transitions[y_t][y_{t+1}] + end[y_T]

All sums run in log space via log-sum-exp, so large emission margins
stay finite.  Label ties in Viterbi break toward the lower index.
"""

from __future__ import annotations

import numpy as np


def _logsumexp(a: np.ndarray, axis=None):
    m = np.max(a, axis=axis, keepdims=True)
    out = m + np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis) if axis is not None else float(out.reshape(()))


def path_score(
    emissions: np.ndarray,
    transitions: np.ndarray,
    start: np.ndarray,
    end: np.ndarray,
    labels,
) -> float:
    labels = np.asarray(labels, dtype=int)
    score = float(start[labels[0]] + end[labels[-1]])
    score += float(emissions[np.arange(len(labels)), labels].sum())
    score += float(transitions[labels[:-1], labels[1:]].sum())
    return score


def _forward_alphas(emissions, transitions, start):
    T, L = emissions.shape
    alpha = np.empty((T, L))
    alpha[0] = start + emissions[0]
    for t in range(1, T):
        alpha[t] = emissions[t] + _logsumexp(alpha[t - 1][:, None] + transitions, axis=0)
    return alpha


def crf_log_partition(emissions, transitions, start, end) -> float:
    """log of the sum of exp(path score) over all L^T label paths."""
    alpha = _forward_alphas(emissions, transitions, start)
    return float(_logsumexp(alpha[-1] + end))


def crf_marginals(emissions, transitions, start, end):
    """(log_partition, unary posteriors (T,L), pairwise sums (L,L)).

    The pairwise matrix is sum_t P(y_t = i, y_{t+1} = j); these are the
    sufficient statistics for the log-partition gradient.
    """
    T, L = emissions.shape
    alpha = _forward_alphas(emissions, transitions, start)
    beta = np.empty((T, L))
    beta[-1] = end
    for t in range(T - 2, -1, -1):
        beta[t] = _logsumexp(
            transitions + (emissions[t + 1] + beta[t + 1])[None, :], axis=1
        )
    log_z = float(_logsumexp(alpha[-1] + end))
    unary = np.exp(alpha + beta - log_z)
    pairwise = np.zeros((L, L))
    for t in range(T - 1):
        logp = (
            alpha[t][:, None]
            + transitions
            + (emissions[t + 1] + beta[t + 1])[None, :]
            - log_z
        )
        pairwise += np.exp(logp)
    return log_z, unary, pairwise


def crf_viterbi(emissions, transitions, start, end) -> np.ndarray:
    """Highest-scoring label path; ties resolve to the lower label."""
    T, L = emissions.shape
    delta = start + emissions[0]
    back = np.zeros((T, L), dtype=int)
    for t in range(1, T):
        cand = delta[:, None] + transitions  # (from, to)
        back[t] = np.argmax(cand, axis=0)  # first max = lowest label
        delta = emissions[t] + cand[back[t], np.arange(L)]
    last = int(np.argmax(delta + end))
    path = np.empty(T, dtype=int)
    path[-1] = last
    for t in range(T - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path


def crf_loss_and_grads(emissions, transitions, start, end, labels):
    """Per-sequence CRF loss (log Z - gold score)/T and its gradients.

    Returns (loss, d_emissions, d_transitions, d_start, d_end); the
    gradients of the normalized loss, i.e. (posterior - indicator)/T.
    """
    labels = np.asarray(labels, dtype=int)
    T, L = emissions.shape
    log_z, unary, pairwise = crf_marginals(emissions, transitions, start, end)
    gold = path_score(emissions, transitions, start, end, labels)
    loss = (log_z - gold) / T

    d_emis = unary.copy()
    d_emis[np.arange(T), labels] -= 1.0
    d_trans = pairwise.copy()
    np.add.at(d_trans, (labels[:-1], labels[1:]), -1.0)
    d_start = unary[0].copy()
    d_start[labels[0]] -= 1.0
    d_end = unary[-1].copy()
    d_end[labels[-1]] -= 1.0
    return loss, d_emis / T, d_trans / T, d_start / T, d_end / T
