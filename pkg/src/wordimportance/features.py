"""Per-word model inputs from frame tracks and word timestamps.

Each word becomes a variable-length sequence of 48-dim sub-word window
vectors (24 raw acoustic features + the same 24 speaker-z-normalized)
plus one 12-dim lexical vector (6 raw + 6 z-normalized), for 60
distinct features in total.

Raw window layout:
  [0..9]   pitch contour stats over voiced frames
  [10..19] rms energy contour stats
  [20]     mean mid-band (500-2000 Hz) rms
  [21]     mean spectral tilt (H1-H2) over voiced frames
  [22]     mean HNR over voiced frames
  [23]     voiced-frame fraction
Raw lexical layout:
  [0] duration  [1] relative position  [2] silence before
  [3] syllable count  [4] mean syllable duration  [5] articulation rate

Contour statistics inside a window use times relative to the window's
first frame, so a silent window is an exact zero vector.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .audio import AudioBuffer
from .dsp import DspConfig, FrameTrack, compute_frame_track, contour_stats, detect_syllable_nuclei
from .errors import ConfigError, DataError

log = logging.getLogger(__name__)

N_WINDOW_RAW = 24
N_LEXICAL_RAW = 6
N_WINDOW = 2 * N_WINDOW_RAW
N_LEXICAL = 2 * N_LEXICAL_RAW

DEFAULT_TAU_S = 0.050
DEFAULT_HOP_S = 0.040

# raw-half index ranges of the ablatable acoustic groups
WINDOW_GROUPS = {
    "FREQ": tuple(range(0, 10)),
    "ENG": tuple(range(10, 21)),
    "VOC": tuple(range(21, 24)),
}
ABLATION_GROUPS = ("FREQ", "ENG", "VOC", "LEX", "ZNORM")


@dataclass(frozen=True)
class WordTiming:
    token: str
    start: float
    end: float

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class SubwordFeatureSeq:
    windows: np.ndarray  # (n_windows, 48)
    window_spans: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class WordLexicalFeatures:
    vector: np.ndarray  # (12,)


@dataclass
class RawWordFeatures:
    raw_windows: np.ndarray  # (n_windows, 24)
    window_spans: tuple[tuple[float, float], ...]
    raw_lexical: np.ndarray  # (6,)


@dataclass
class RawUtteranceFeatures:
    utterance_id: str
    speaker_id: str
    words: list[RawWordFeatures] = field(default_factory=list)


@dataclass
class SpeakerStats:
    """Per-speaker mean/std of the 30 raw features (24 window + 6 lexical).

    Fit on training data only; unseen speakers fall back to the global
    row.  Stored as (mean, std) pairs of length-30 vectors.
    """

    per_speaker: dict[str, tuple[np.ndarray, np.ndarray]]
    global_mean: np.ndarray
    global_std: np.ndarray

    def lookup(self, speaker_id: str) -> tuple[np.ndarray, np.ndarray]:
        if speaker_id in self.per_speaker:
            return self.per_speaker[speaker_id]
        return self.global_mean, self.global_std

    def to_dict(self) -> dict:
        return {
            "per_speaker": {
                spk: {"mean": m.tolist(), "std": s.tolist()}
                for spk, (m, s) in sorted(self.per_speaker.items())
            },
            "global": {"mean": self.global_mean.tolist(), "std": self.global_std.tolist()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpeakerStats":
        per = {
            spk: (np.array(v["mean"], dtype=np.float64), np.array(v["std"], dtype=np.float64))
            for spk, v in d["per_speaker"].items()
        }
        return cls(
            per_speaker=per,
            global_mean=np.array(d["global"]["mean"], dtype=np.float64),
            global_std=np.array(d["global"]["std"], dtype=np.float64),
        )


@dataclass(frozen=True)
class FeatureMask:
    """Indices kept out of the 48 window / 12 lexical feature slots."""

    window_indices: tuple[int, ...]
    lexical_indices: tuple[int, ...]

    @property
    def n_window(self) -> int:
        return len(self.window_indices)

    @property
    def n_lexical(self) -> int:
        return len(self.lexical_indices)

    def apply_windows(self, windows: np.ndarray) -> np.ndarray:
        return windows[:, list(self.window_indices)]

    def apply_lexical(self, lex: np.ndarray) -> np.ndarray:
        return lex[list(self.lexical_indices)]

    def to_dict(self) -> dict:
        return {
            "window_indices": list(self.window_indices),
            "lexical_indices": list(self.lexical_indices),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureMask":
        return cls(tuple(d["window_indices"]), tuple(d["lexical_indices"]))


def full_mask() -> FeatureMask:
    return FeatureMask(tuple(range(N_WINDOW)), tuple(range(N_LEXICAL)))


def mask_without(group: str | None) -> FeatureMask:
    """Feature mask with one ablation group removed (None = keep all)."""
    if group is None:
        return full_mask()
    if group not in ABLATION_GROUPS:
        raise ConfigError(f"unknown ablation group {group!r}; choose from {ABLATION_GROUPS}")
    win_drop: set[int] = set()
    lex_drop: set[int] = set()
    if group == "ZNORM":
        win_drop = set(range(N_WINDOW_RAW, N_WINDOW))
        lex_drop = set(range(N_LEXICAL_RAW, N_LEXICAL))
    elif group == "LEX":
        lex_drop = set(range(N_LEXICAL))
    else:
        raw = WINDOW_GROUPS[group]
        win_drop = set(raw) | {i + N_WINDOW_RAW for i in raw}
    return FeatureMask(
        tuple(i for i in range(N_WINDOW) if i not in win_drop),
        tuple(i for i in range(N_LEXICAL) if i not in lex_drop),
    )


def subword_windows(
    word: WordTiming, tau: float = DEFAULT_TAU_S, hop: float = DEFAULT_HOP_S
) -> list[tuple[float, float]]:
    """Sliding spans [start + k hop, start + k hop + tau] inside the word.

    A word shorter than tau yields a single span covering the word.
    """
    if tau <= 0 or not (0 < hop <= tau):
        raise ValueError(f"need tau > 0 and 0 < hop <= tau, got tau={tau} hop={hop}")
    dur = word.duration
    if dur < tau:
        return [(word.start, word.end)]
    n = int((dur - tau) / hop + 1e-9) + 1
    return [(word.start + k * hop, word.start + k * hop + tau) for k in range(n)]


def subword_features(track: FrameTrack, span: tuple[float, float]) -> np.ndarray:
    """24 raw acoustic features of one window span."""
    start, end = span
    sel = np.nonzero((track.frame_times >= start) & (track.frame_times <= end))[0]
    if len(sel) == 0:
        log.warning("window span [%.3f, %.3f] contains no frame centers", start, end)
        return np.zeros(N_WINDOW_RAW)
    times = track.frame_times[sel] - track.frame_times[sel[0]]
    voiced = track.voiced[sel]
    out = np.zeros(N_WINDOW_RAW)
    if np.any(voiced):
        out[0:10] = contour_stats(track.pitch_hz[sel][voiced], times[voiced]).as_vector()
        tilt = track.tilt_db[sel][voiced]
        out[21] = float(np.mean(np.nan_to_num(tilt)))
        out[22] = float(np.mean(track.hnr_db[sel][voiced]))
    out[10:20] = contour_stats(track.rms[sel], times).as_vector()
    out[20] = float(np.mean(track.band_rms[sel]))
    out[23] = float(np.mean(voiced))
    return out


def lexical_features(i: int, words: list[WordTiming], syllables: int) -> np.ndarray:
    """6 raw lexical features of word i within its turn."""
    word = words[i]
    n = len(words)
    duration = word.duration
    position = i / max(1, n - 1)
    prev_end = words[i - 1].end if i > 0 else 0.0
    silence = max(0.0, word.start - prev_end)
    mean_syll = duration / max(1, syllables)
    rate = syllables / duration
    return np.array([duration, position, silence, float(syllables), mean_syll, rate])


def extract_raw_utterance(
    buf: AudioBuffer,
    words: list[WordTiming],
    utterance_id: str,
    speaker_id: str,
    dsp_cfg: DspConfig = DspConfig(),
    tau: float = DEFAULT_TAU_S,
    hop: float = DEFAULT_HOP_S,
) -> RawUtteranceFeatures:
    """Raw (un-normalized) per-word features for one utterance."""
    for w in words:
        if not (0.0 <= w.start < w.end <= buf.duration + 1e-6):
            raise DataError(
                f"{utterance_id}: word {w.token!r} [{w.start}, {w.end}] "
                f"outside audio of {buf.duration:.3f} s"
            )
    out = RawUtteranceFeatures(utterance_id=utterance_id, speaker_id=speaker_id)
    if not words:
        return out
    track = compute_frame_track(buf, dsp_cfg)
    for i, word in enumerate(words):
        spans = subword_windows(word, tau, hop)
        raws = np.stack([subword_features(track, s) for s in spans])
        syll = detect_syllable_nuclei(
            buf, (word.start, word.end), track, dip_db=dsp_cfg.nuclei_dip_db
        )
        out.words.append(
            RawWordFeatures(
                raw_windows=raws,
                window_spans=tuple(spans),
                raw_lexical=lexical_features(i, words, syll),
            )
        )
    return out


def fit_speaker_stats(utterances: list[RawUtteranceFeatures]) -> SpeakerStats:
    """Per-speaker (and global) mean/std of the 30 raw features.

    Window rows and lexical rows are pooled separately; the 30-vector
    is [24 window features, 6 lexical features].  Population std.
    """
    if not utterances:
        raise DataError("cannot fit speaker stats on an empty corpus")
    win_rows: dict[str, list[np.ndarray]] = {}
    lex_rows: dict[str, list[np.ndarray]] = {}
    for utt in utterances:
        for wf in utt.words:
            win_rows.setdefault(utt.speaker_id, []).append(wf.raw_windows)
            lex_rows.setdefault(utt.speaker_id, []).append(wf.raw_lexical[None, :])

    def stack_stats(win: list[np.ndarray], lex: list[np.ndarray]):
        w = np.concatenate(win, axis=0)
        l = np.concatenate(lex, axis=0)
        mean = np.concatenate([w.mean(axis=0), l.mean(axis=0)])
        std = np.concatenate([w.std(axis=0), l.std(axis=0)])
        return mean, std

    per_speaker = {
        spk: stack_stats(win_rows[spk], lex_rows[spk]) for spk in sorted(win_rows)
    }
    g_mean, g_std = stack_stats(
        [r for spk in sorted(win_rows) for r in win_rows[spk]],
        [r for spk in sorted(lex_rows) for r in lex_rows[spk]],
    )
    return SpeakerStats(per_speaker=per_speaker, global_mean=g_mean, global_std=g_std)


def _znorm(raw: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    z = np.zeros_like(raw)
    ok = std >= 1e-8
    z[..., ok] = (raw[..., ok] - mean[ok]) / std[ok]
    return z


def znorm_augment(raw: np.ndarray, speaker_id: str, stats: SpeakerStats, kind: str) -> np.ndarray:
    """Append the z-normalized copy: 24_w -> 48 or 6_l -> 12 features.

    kind is "window" or "lexical".  Constant features (std < 1e-8)
    z-norm to 0; speakers missing from the stats use the global row.
    """
    mean, std = stats.lookup(speaker_id)
    if kind == "window":
        mean, std = mean[:N_WINDOW_RAW], std[:N_WINDOW_RAW]
    elif kind == "lexical":
        mean, std = mean[N_WINDOW_RAW:], std[N_WINDOW_RAW:]
    else:
        raise ValueError(f"kind must be 'window' or 'lexical', got {kind!r}")
    return np.concatenate([raw, _znorm(raw, mean, std)], axis=-1)


def augment_utterance(
    raw: RawUtteranceFeatures, stats: SpeakerStats
) -> list[tuple[SubwordFeatureSeq, WordLexicalFeatures]]:
    """Raw features -> full 48/12-dim bundles for one utterance."""
    bundles = []
    for wf in raw.words:
        windows = znorm_augment(wf.raw_windows, raw.speaker_id, stats, "window")
        lex = znorm_augment(wf.raw_lexical, raw.speaker_id, stats, "lexical")
        bundles.append(
            (
                SubwordFeatureSeq(windows=windows, window_spans=wf.window_spans),
                WordLexicalFeatures(vector=lex),
            )
        )
    return bundles


def assemble_utterance(
    buf: AudioBuffer,
    words: list[WordTiming],
    speaker_id: str,
    stats: SpeakerStats,
    dsp_cfg: DspConfig = DspConfig(),
    tau: float = DEFAULT_TAU_S,
    hop: float = DEFAULT_HOP_S,
) -> list[tuple[SubwordFeatureSeq, WordLexicalFeatures]]:
    raw = extract_raw_utterance(buf, words, "<inline>", speaker_id, dsp_cfg, tau, hop)
    return augment_utterance(raw, stats)


def format_feature_dump(
    utterance_id: str, speaker_id: str,
    bundles: list[tuple[SubwordFeatureSeq, WordLexicalFeatures]],
    tokens: list[str],
) -> str:
    """Columnar text dump of one utterance's assembled features."""
    lines = [
        f"# wordimportance-features v1 utterance={utterance_id} "
        f"speaker={speaker_id} window_dim={N_WINDOW} lexical_dim={N_LEXICAL}"
    ]
    for i, (seq, lex) in enumerate(bundles):
        lines.append(f"word\t{i}\t{tokens[i]}\t{len(seq.windows)}")
        for k, (span, row) in enumerate(zip(seq.window_spans, seq.windows)):
            vals = "\t".join(repr(float(v)) for v in row)
            lines.append(f"win\t{i}\t{k}\t{span[0]!r}\t{span[1]!r}\t{vals}")
        lines.append("lex\t" + str(i) + "\t" + "\t".join(repr(float(v)) for v in lex.vector))
    return "\n".join(lines) + "\n"
