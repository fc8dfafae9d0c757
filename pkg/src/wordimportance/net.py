"""Word-importance sequence labeler, written directly in numpy.

Architecture: each word's sub-word window vectors run through a
bidirectional GRU whose two final hidden states (32 each) concatenate
with the word's 12 lexical features into a 76-dim word vector; a
BiLSTM (128 per direction) contextualizes the word sequence; one of
three heads maps each 256-dim state to labels:

  softmax  - dense + softmax, trained with cross-entropy
  ordinal  - dense + elementwise sigmoid on cumulative targets
             (LI=[1,0,0], MI=[1,1,0], HI=[1,1,1]), decoded by scanning
  crf      - dense emissions + transition/start/end scores

Backward passes are derived by hand per layer; `gradient_check`
verifies them against central finite differences.  Everything is
float64 and deterministic given (seed, params, input).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import crf as crf_ops
from .errors import ConfigError

HEAD_KINDS = ("softmax", "ordinal", "crf")
LABEL_NAMES = ("LI", "MI", "HI")

_GATE_SPLITS_GRU = 3  # r, z, candidate
_GATE_SPLITS_LSTM = 4  # i, f, g, o


@dataclass(frozen=True)
class ModelConfig:
    subword_input_dim: int = 48
    lexical_dim: int = 12
    gru_hidden: int = 32  # per direction; word vector = 64
    lstm_hidden: int = 128  # per direction; contextual state = 256
    num_labels: int = 3
    head_kind: str = "ordinal"
    seed: int = 0

    def __post_init__(self):
        if self.head_kind not in HEAD_KINDS:
            raise ConfigError(f"head_kind must be one of {HEAD_KINDS}, got {self.head_kind!r}")
        if min(self.subword_input_dim, self.gru_hidden, self.lstm_hidden) <= 0:
            raise ConfigError("all model dimensions must be positive")
        if self.lexical_dim < 0:
            raise ConfigError("lexical_dim must be >= 0")
        if self.num_labels < 2:
            raise ConfigError("need at least 2 labels")

    @property
    def word_input_dim(self) -> int:
        return 2 * self.gru_hidden + self.lexical_dim

    @property
    def state_dim(self) -> int:
        return 2 * self.lstm_hidden

    def to_dict(self) -> dict:
        return {
            "subword_input_dim": self.subword_input_dim,
            "lexical_dim": self.lexical_dim,
            "gru_hidden": self.gru_hidden,
            "lstm_hidden": self.lstm_hidden,
            "num_labels": self.num_labels,
            "head_kind": self.head_kind,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)


@dataclass
class UtteranceInput:
    """Model-ready features for one dialogue turn."""

    windows: list[np.ndarray]  # per word: (n_windows, subword_input_dim)
    lexical: np.ndarray  # (n_words, lexical_dim)

    @property
    def n_words(self) -> int:
        return len(self.windows)


def parameter_shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    dw, dl = cfg.subword_input_dim, cfg.lexical_dim
    hg, hl, L = cfg.gru_hidden, cfg.lstm_hidden, cfg.num_labels
    ds = 2 * hg + dl
    shapes: dict[str, tuple[int, ...]] = {}
    for d in ("f", "b"):
        shapes[f"gru_{d}.W"] = (dw, 3 * hg)
        shapes[f"gru_{d}.U"] = (hg, 3 * hg)
        shapes[f"gru_{d}.b"] = (3 * hg,)
        shapes[f"lstm_{d}.W"] = (ds, 4 * hl)
        shapes[f"lstm_{d}.U"] = (hl, 4 * hl)
        shapes[f"lstm_{d}.b"] = (4 * hl,)
    for head in ("softmax", "ordinal", "crf"):
        shapes[f"{head}.W"] = (2 * hl, L)
        shapes[f"{head}.b"] = (L,)
    shapes["crf.T"] = (L, L)
    shapes["crf.start"] = (L,)
    shapes["crf.end"] = (L,)
    return shapes


def _orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def init_parameters(cfg: ModelConfig, scale: float = 0.08) -> dict[str, np.ndarray]:
    """Seeded init: orthogonal recurrent blocks, uniform(-scale, scale)
    input/projection matrices, zero biases except LSTM forget gate = 1."""
    rng = np.random.default_rng(cfg.seed)
    params: dict[str, np.ndarray] = {}
    for name, shape in parameter_shapes(cfg).items():
        if name.endswith(".U"):
            h = shape[0]
            blocks = [_orthogonal(rng, h) for _ in range(shape[1] // h)]
            params[name] = np.concatenate(blocks, axis=1)
        elif name.endswith(".W"):
            params[name] = rng.uniform(-scale, scale, size=shape)
        else:
            params[name] = np.zeros(shape)
    for d in ("f", "b"):
        h = cfg.lstm_hidden
        params[f"lstm_{d}.b"][h : 2 * h] = 1.0  # forget-gate bias
    return params


def zero_gradients(params: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {k: np.zeros_like(v) for k, v in params.items()}


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


# ---------------------------------------------------------------- GRU

def _gru_forward(X: np.ndarray, W, U, b) -> tuple[np.ndarray, dict]:
    n = len(X)
    hg = U.shape[0]
    h = np.zeros(hg)
    cache = {
        "X": X,
        "h_prev": np.empty((n, hg)),
        "r": np.empty((n, hg)),
        "z": np.empty((n, hg)),
        "c": np.empty((n, hg)),
    }
    Wr, Wz, Wc = W[:, :hg], W[:, hg : 2 * hg], W[:, 2 * hg :]
    Ur, Uz, Uc = U[:, :hg], U[:, hg : 2 * hg], U[:, 2 * hg :]
    xw = X @ W  # (n, 3h), hoisted out of the loop
    for t in range(n):
        cache["h_prev"][t] = h
        r = _sigmoid(xw[t, :hg] + h @ Ur + b[:hg])
        z = _sigmoid(xw[t, hg : 2 * hg] + h @ Uz + b[hg : 2 * hg])
        c = np.tanh(xw[t, 2 * hg :] + (r * h) @ Uc + b[2 * hg :])
        h = (1.0 - z) * c + z * h
        cache["r"][t], cache["z"][t], cache["c"][t] = r, z, c
    return h, cache


def _gru_backward(d_h_final: np.ndarray, cache: dict, W, U, grads: dict, prefix: str):
    """Backprop from the final hidden state; accumulates into grads."""
    X, h_prev = cache["X"], cache["h_prev"]
    n, hg = h_prev.shape
    Ur, Uz, Uc = U[:, :hg], U[:, hg : 2 * hg], U[:, 2 * hg :]
    dW, dU, db = grads[prefix + ".W"], grads[prefix + ".U"], grads[prefix + ".b"]
    dh = d_h_final.copy()
    for t in range(n - 1, -1, -1):
        r, z, c, hp = cache["r"][t], cache["z"][t], cache["c"][t], h_prev[t]
        dz = dh * (hp - c) * z * (1.0 - z)
        dc = dh * (1.0 - z)
        da_c = dc * (1.0 - c * c)
        dh_next = dh * z
        drh = da_c @ Uc.T
        dr = drh * hp
        dh_next = dh_next + drh * r
        da_r = dr * r * (1.0 - r)
        da_z = dz  # sigma' folded in above
        da = np.concatenate([da_r, da_z, da_c])
        dW += np.outer(X[t], da)
        dU[:, :hg] += np.outer(hp, da_r)
        dU[:, hg : 2 * hg] += np.outer(hp, da_z)
        dU[:, 2 * hg :] += np.outer(r * hp, da_c)
        db += da
        dh_next = dh_next + da_r @ Ur.T + da_z @ Uz.T
        dh = dh_next


# --------------------------------------------------------------- LSTM

def _lstm_forward(X: np.ndarray, W, U, b) -> tuple[np.ndarray, dict]:
    n = len(X)
    hl = U.shape[0]
    h = np.zeros(hl)
    c = np.zeros(hl)
    cache = {
        "X": X,
        "h_prev": np.empty((n, hl)),
        "c_prev": np.empty((n, hl)),
        "i": np.empty((n, hl)),
        "f": np.empty((n, hl)),
        "g": np.empty((n, hl)),
        "o": np.empty((n, hl)),
        "tanh_c": np.empty((n, hl)),
    }
    H = np.empty((n, hl))
    xw = X @ W
    for t in range(n):
        cache["h_prev"][t], cache["c_prev"][t] = h, c
        a = xw[t] + h @ U + b
        i = _sigmoid(a[:hl])
        f = _sigmoid(a[hl : 2 * hl])
        g = np.tanh(a[2 * hl : 3 * hl])
        o = _sigmoid(a[3 * hl :])
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        cache["i"][t], cache["f"][t], cache["g"][t], cache["o"][t] = i, f, g, o
        cache["tanh_c"][t] = tc
        H[t] = h
    return H, cache


def _lstm_backward(dH: np.ndarray, cache: dict, W, U, grads: dict, prefix: str) -> np.ndarray:
    """Backprop through all steps; returns dX, accumulates into grads."""
    X = cache["X"]
    n, hl = cache["h_prev"].shape
    dW, dU, db = grads[prefix + ".W"], grads[prefix + ".U"], grads[prefix + ".b"]
    dX = np.zeros_like(X)
    dh = np.zeros(hl)
    dc = np.zeros(hl)
    for t in range(n - 1, -1, -1):
        i, f, g, o = cache["i"][t], cache["f"][t], cache["g"][t], cache["o"][t]
        tc = cache["tanh_c"][t]
        cp, hp = cache["c_prev"][t], cache["h_prev"][t]
        dht = dh + dH[t]
        do = dht * tc
        dct = dc + dht * o * (1.0 - tc * tc)
        di = dct * g
        df = dct * cp
        dg = dct * i
        dc = dct * f
        da = np.concatenate(
            [
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                dg * (1.0 - g * g),
                do * o * (1.0 - o),
            ]
        )
        dW += np.outer(X[t], da)
        dU += np.outer(hp, da)
        db += da
        dX[t] = da @ W.T
        dh = da @ U.T
    return dX


# ------------------------------------------------------------- heads

def softmax_head(h: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dense + softmax; rows sum to 1."""
    logits = np.atleast_2d(h) @ W + b
    logits = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(logits)
    p = e / e.sum(axis=1, keepdims=True)
    return p[0] if h.ndim == 1 else p


def ordinal_head(h: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dense + elementwise sigmoid; intentionally unnormalized."""
    return _sigmoid(np.atleast_2d(h) @ W + b)[0] if h.ndim == 1 else _sigmoid(h @ W + b)


def ordinal_targets(label: int, num_labels: int = 3) -> np.ndarray:
    """Cumulative encoding: every label at or below the gold one is 1."""
    if not 0 <= label < num_labels:
        raise ValueError(f"label {label} outside [0, {num_labels})")
    return (np.arange(num_labels) <= label).astype(np.float64)


def ordinal_decode(scores, threshold: float = 0.5) -> int:
    """Scan scores low-to-high; return the last label at/above threshold
    before the first miss.  A first score below threshold yields LI."""
    label = 0
    for k, s in enumerate(scores):
        if s >= threshold:
            label = k
        else:
            break
    return label


# ------------------------------------------------- full model passes

@dataclass
class ForwardCache:
    word_caches: list[tuple[dict, dict]] = field(default_factory=list)
    lstm_f: dict | None = None
    lstm_b: dict | None = None
    S: np.ndarray | None = None
    H: np.ndarray | None = None


def model_forward(params: dict, cfg: ModelConfig, utt: UtteranceInput) -> tuple[np.ndarray, ForwardCache]:
    """Contextual states H (n_words, 256) for one utterance."""
    cache = ForwardCache()
    hg = cfg.gru_hidden
    vecs = np.empty((utt.n_words, 2 * hg))
    for t, Xw in enumerate(utt.windows):
        hf, cf = _gru_forward(Xw, params["gru_f.W"], params["gru_f.U"], params["gru_f.b"])
        hb, cb = _gru_forward(Xw[::-1], params["gru_b.W"], params["gru_b.U"], params["gru_b.b"])
        vecs[t, :hg] = hf
        vecs[t, hg:] = hb
        cache.word_caches.append((cf, cb))
    S = np.concatenate([vecs, utt.lexical], axis=1) if cfg.lexical_dim else vecs
    Hf, cache.lstm_f = _lstm_forward(S, params["lstm_f.W"], params["lstm_f.U"], params["lstm_f.b"])
    Hb_rev, cache.lstm_b = _lstm_forward(S[::-1], params["lstm_b.W"], params["lstm_b.U"], params["lstm_b.b"])
    H = np.concatenate([Hf, Hb_rev[::-1]], axis=1)
    cache.S, cache.H = S, H
    return H, cache


def model_backward(dH: np.ndarray, cache: ForwardCache, params: dict, cfg: ModelConfig, grads: dict):
    hl, hg = cfg.lstm_hidden, cfg.gru_hidden
    dS = _lstm_backward(dH[:, :hl], cache.lstm_f, params["lstm_f.W"], params["lstm_f.U"], grads, "lstm_f")
    dS = dS + _lstm_backward(
        dH[:, hl:][::-1], cache.lstm_b, params["lstm_b.W"], params["lstm_b.U"], grads, "lstm_b"
    )[::-1]
    for t, (cf, cb) in enumerate(cache.word_caches):
        _gru_backward(dS[t, :hg], cf, params["gru_f.W"], params["gru_f.U"], grads, "gru_f")
        _gru_backward(dS[t, hg : 2 * hg], cb, params["gru_b.W"], params["gru_b.U"], grads, "gru_b")


def utterance_loss_and_grads(
    params: dict, cfg: ModelConfig, utt: UtteranceInput, labels, grads: dict
) -> float:
    """Loss of one utterance; gradients accumulate into `grads`."""
    labels = np.asarray(labels, dtype=int)
    T = utt.n_words
    if len(labels) != T:
        raise ValueError(f"{T} words but {len(labels)} labels")
    H, cache = model_forward(params, cfg, utt)
    head = cfg.head_kind
    W, b = params[f"{head}.W"], params[f"{head}.b"]
    logits = H @ W + b

    if head == "softmax":
        shifted = logits - logits.max(axis=1, keepdims=True)
        log_z = np.log(np.exp(shifted).sum(axis=1))
        log_p = shifted - log_z[:, None]
        loss = float(-log_p[np.arange(T), labels].mean())
        d_logits = np.exp(log_p)
        d_logits[np.arange(T), labels] -= 1.0
        d_logits /= T
    elif head == "ordinal":
        targets = np.stack([ordinal_targets(y, cfg.num_labels) for y in labels])
        # BCE from logits: -t log s - (1-t) log(1-s) = softplus(x) - t x
        loss = float((_softplus(logits) - targets * logits).mean())
        d_logits = (_sigmoid(logits) - targets) / logits.size
    else:  # crf
        loss, d_logits, d_T, d_start, d_end = crf_ops.crf_loss_and_grads(
            logits, params["crf.T"], params["crf.start"], params["crf.end"], labels
        )
        grads["crf.T"] += d_T
        grads["crf.start"] += d_start
        grads["crf.end"] += d_end

    grads[f"{head}.W"] += H.T @ d_logits
    grads[f"{head}.b"] += d_logits.sum(axis=0)
    model_backward(d_logits @ W.T, cache, params, cfg, grads)
    return loss


def batch_loss_and_grads(
    params: dict, cfg: ModelConfig, batch: list[tuple[UtteranceInput, np.ndarray]]
) -> tuple[float, dict]:
    """Mean utterance loss over a batch plus matching mean gradients."""
    if not batch:
        raise ValueError("empty batch")
    grads = zero_gradients(params)
    total = 0.0
    for utt, labels in batch:
        total += utterance_loss_and_grads(params, cfg, utt, labels, grads)
    inv = 1.0 / len(batch)
    for g in grads.values():
        g *= inv
    return total * inv, grads


def predict_utterance(params: dict, cfg: ModelConfig, utt: UtteranceInput) -> np.ndarray:
    H, _ = model_forward(params, cfg, utt)
    head = cfg.head_kind
    logits = H @ params[f"{head}.W"] + params[f"{head}.b"]
    if head == "softmax":
        return np.argmax(logits, axis=1)
    if head == "ordinal":
        scores = _sigmoid(logits)
        return np.array([ordinal_decode(row) for row in scores], dtype=int)
    return crf_ops.crf_viterbi(logits, params["crf.T"], params["crf.start"], params["crf.end"])


def gradient_check(
    params: dict,
    cfg: ModelConfig,
    batch: list[tuple[UtteranceInput, np.ndarray]],
    eps: float = 1e-5,
    samples_per_tensor: int = 120,
    seed: int = 0,
    loss_fn: Callable | None = None,
) -> dict[str, float]:
    """Relative error of analytic vs. central-difference gradients.

    For each parameter tensor, a seeded sample of elements is perturbed
    by +/- eps; the error is ||g_analytic - g_fd|| / max(norms, 1e-8)
    over the sampled coordinates.
    """
    if loss_fn is None:
        loss_fn = lambda: batch_loss_and_grads(params, cfg, batch)[0]
    _, grads = batch_loss_and_grads(params, cfg, batch)
    rng = np.random.default_rng(seed)
    report: dict[str, float] = {}
    for name in sorted(params):
        tensor = params[name]
        flat = tensor.reshape(-1)
        k = min(samples_per_tensor, flat.size)
        idx = rng.choice(flat.size, size=k, replace=False)
        g_fd = np.empty(k)
        for j, i in enumerate(idx):
            keep = flat[i]
            flat[i] = keep + eps
            up = loss_fn()
            flat[i] = keep - eps
            down = loss_fn()
            flat[i] = keep
            g_fd[j] = (up - down) / (2.0 * eps)
        g_an = grads[name].reshape(-1)[idx]
        denom = max(float(np.linalg.norm(g_an)), float(np.linalg.norm(g_fd)), 1e-8)
        report[name] = float(np.linalg.norm(g_an - g_fd)) / denom
    return report


def clip_global_norm(grads: dict[str, np.ndarray], max_norm: float) -> float:
    """Scale all gradients so their joint L2 norm is at most max_norm."""
    total = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total > max_norm > 0:
        scale = max_norm / total
        for g in grads.values():
            g *= scale
    return total
