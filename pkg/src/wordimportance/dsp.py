"""Framewise prosodic contours and contour statistics.

Everything here is pure numpy on mono float64 audio.  The analysis grid
is 25 ms frames every 10 ms; frame times are frame centers in seconds.
Pitch uses the normalized (energy-compensated) autocorrelation with
parabolic peak interpolation, searched over 75-500 Hz with a 0.45
voicing threshold.  Unvoiced frames carry NaN in the optional contours
(pitch, tilt, HNR).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .audio import AudioBuffer
from .errors import DataError

log = logging.getLogger(__name__)

_INTENSITY_FLOOR = 1e-10
# peaks within this much of the global autocorrelation maximum are
# treated as equivalent; the shortest lag among them wins, which keeps
# harmonic signals from locking onto a subharmonic (half/third pitch)
_PEAK_TIE_TOL = 0.01


@dataclass(frozen=True)
class DspConfig:
    frame_s: float = 0.025
    hop_s: float = 0.010
    fmin_hz: float = 75.0
    fmax_hz: float = 500.0
    voicing_threshold: float = 0.45
    band_lo_hz: float = 500.0
    band_hi_hz: float = 2000.0
    nuclei_dip_db: float = 2.0


@dataclass(frozen=True)
class FrameTrack:
    """Per-frame contours for one utterance; NaN marks absent values."""

    frame_times: np.ndarray
    pitch_hz: np.ndarray
    voicing_strength: np.ndarray
    rms: np.ndarray
    band_rms: np.ndarray
    tilt_db: np.ndarray
    hnr_db: np.ndarray

    @property
    def n_frames(self) -> int:
        return len(self.frame_times)

    @property
    def voiced(self) -> np.ndarray:
        return ~np.isnan(self.pitch_hz)


@dataclass(frozen=True)
class ContourStats:
    """The ten aggregate statistics of one contour."""

    minimum: float
    time_of_min: float
    maximum: float
    time_of_max: float
    mean: float
    median: float
    value_range: float
    slope: float
    std: float
    skewness: float

    def as_vector(self) -> np.ndarray:
        return np.array(
            [
                self.minimum,
                self.time_of_min,
                self.maximum,
                self.time_of_max,
                self.mean,
                self.median,
                self.value_range,
                self.slope,
                self.std,
                self.skewness,
            ]
        )


def _frame_matrix(x: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    n = (len(x) - frame_len) // hop + 1
    idx = np.arange(n)[:, None] * hop + np.arange(frame_len)[None, :]
    return x[idx]


def _nccf_rows(frames: np.ndarray) -> np.ndarray:
    """Normalized cross-correlation per row, lags 0..L-1.

    r[tau] = sum(x[t] x[t+tau]) / sqrt(sum_head(x^2) sum_tail(x^2)),
    computed on mean-removed rows.  Degenerate (zero-energy) spans
    yield 0 rather than NaN.
    """
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    n_rows, L = frames.shape
    d = frames - frames.mean(axis=1, keepdims=True)
    nfft = 1
    while nfft < 2 * L:
        nfft *= 2
    spec = np.fft.rfft(d, nfft, axis=1)
    num = np.fft.irfft(spec * np.conj(spec), nfft, axis=1)[:, :L]
    csum = np.cumsum(d * d, axis=1)
    total = csum[:, -1:]
    e_head = csum[:, ::-1]  # e_head[tau] = sum over t < L - tau
    e_tail = np.concatenate([total, total - csum[:, :-1]], axis=1)
    den = np.sqrt(e_head * e_tail)
    out = np.zeros_like(num)
    ok = den > 0
    out[ok] = num[ok] / den[ok]
    return out


def _refine_peak(r: np.ndarray, tau: int) -> tuple[float, float]:
    """Parabolic interpolation of the peak at integer lag tau."""
    L = len(r)
    if tau < 1 or tau > L - 2:
        return float(tau), float(r[tau])
    y1, y2, y3 = float(r[tau - 1]), float(r[tau]), float(r[tau + 1])
    curv = y1 - 2.0 * y2 + y3
    if curv >= 0.0:
        return float(tau), y2
    delta = 0.5 * (y1 - y3) / curv
    delta = min(0.5, max(-0.5, delta))
    value = y2 - 0.25 * (y1 - y3) * delta
    return tau + delta, value


def _pick_peak(r: np.ndarray, lag_lo: int, lag_hi: int) -> tuple[float, float]:
    """Best pitch-period candidate in [lag_lo, lag_hi] of one NCCF row.

    Returns (lag, strength).  Among local maxima within _PEAK_TIE_TOL
    of the strongest one, the shortest lag is chosen.
    """
    window = r[lag_lo : lag_hi + 1]
    padded = np.concatenate([[-np.inf], r, [-np.inf]])
    left = padded[lag_lo : lag_hi + 1]
    right = padded[lag_lo + 2 : lag_hi + 3]
    is_peak = (window >= left) & (window > right)
    peak_lags = np.nonzero(is_peak)[0] + lag_lo
    if len(peak_lags) == 0:
        peak_lags = np.array([lag_lo + int(np.argmax(window))])
    best = float(np.max(r[peak_lags]))
    tau0 = int(peak_lags[r[peak_lags] >= best - _PEAK_TIE_TOL].min())
    lag, value = _refine_peak(r, tau0)
    return lag, min(1.0, max(0.0, value))


def estimate_pitch(
    frame,
    rate: float,
    fmin: float = 75.0,
    fmax: float = 500.0,
    voicing_threshold: float = 0.45,
) -> tuple[float | None, float]:
    """Pitch of one frame, or (None, strength) when unvoiced.

    Strength is the interpolated autocorrelation peak in [0, 1]; the
    frame is voiced when it reaches the threshold.  Lags are clamped to
    the frame length, so short frames simply lose the low end of the
    search range.
    """
    frame = np.asarray(frame, dtype=np.float64)
    L = len(frame)
    lag_lo = max(1, int(math.ceil(rate / fmax)))
    lag_hi = min(L - 1, int(math.floor(rate / fmin)))
    if L < 2 or lag_lo > lag_hi:
        return None, 0.0
    r = _nccf_rows(frame[None, :])[0]
    lag, strength = _pick_peak(r, lag_lo, lag_hi)
    if strength < voicing_threshold or lag <= 0:
        return None, strength
    pitch = min(fmax, max(fmin, rate / lag))
    return pitch, strength


def rms_energy(frame) -> float:
    frame = np.asarray(frame, dtype=np.float64)
    if len(frame) == 0:
        return 0.0
    return float(np.sqrt(np.mean(frame * frame)))


def band_rms(frame, rate: float, lo: float = 500.0, hi: float = 2000.0) -> float:
    """RMS after zeroing spectral content outside [lo, hi] Hz."""
    frame = np.asarray(frame, dtype=np.float64)
    if len(frame) == 0:
        return 0.0
    spec = np.fft.rfft(frame)
    freqs = np.fft.rfftfreq(len(frame), d=1.0 / rate)
    spec[(freqs < lo) | (freqs > hi)] = 0.0
    band = np.fft.irfft(spec, len(frame))
    return float(np.sqrt(np.mean(band * band)))


def spectral_tilt_h1h2(frame, rate: float, f0: float) -> float | None:
    """H1-H2: 20 log10 of first-to-second-harmonic amplitude ratio.

    Harmonic amplitudes are spectral peak magnitudes within +/- f0/4 of
    f0 and 2 f0 on a Hann-windowed, zero-padded spectrum.  Returns None
    when the second harmonic would sit beyond Nyquist.
    """
    if 2.0 * f0 >= rate / 2.0:
        return None
    frame = np.asarray(frame, dtype=np.float64)
    L = len(frame)
    nfft = 4096
    while nfft < 4 * L:
        nfft *= 2
    mag = np.abs(np.fft.rfft(frame * np.hanning(L), nfft))
    freqs = np.fft.rfftfreq(nfft, d=1.0 / rate)

    def peak_amp(f: float) -> float:
        sel = (freqs >= f - f0 / 4.0) & (freqs <= f + f0 / 4.0)
        if not np.any(sel):
            return _INTENSITY_FLOOR
        return max(float(np.max(mag[sel])), _INTENSITY_FLOOR)

    return 20.0 * math.log10(peak_amp(f0) / peak_amp(2.0 * f0))


def hnr_db_from_r(r: float) -> float:
    """Harmonics-to-noise ratio from a normalized autocorrelation peak."""
    r = min(1.0 - 1e-6, max(1e-6, r))
    return 10.0 * math.log10(r / (1.0 - r))


def hnr(frame, rate: float, f0: float) -> float:
    """HNR of a voiced frame from the autocorrelation near lag rate/f0."""
    frame = np.asarray(frame, dtype=np.float64)
    L = len(frame)
    r = _nccf_rows(frame[None, :])[0]
    tau0 = int(round(rate / f0))
    tau0 = max(1, min(L - 1, tau0))
    cand = range(max(1, tau0 - 1), min(L - 1, tau0 + 1) + 1)
    tau_best = max(cand, key=lambda t: r[t])
    _, value = _refine_peak(r, tau_best)
    return hnr_db_from_r(value)


def contour_stats(values, times) -> ContourStats:
    """The ten summary statistics of a (values, times) contour.

    Spread measures are population (not sample) moments; skewness of a
    zero-variance contour is defined as 0, as is the OLS slope when the
    time axis has no variance.
    """
    v = np.asarray(values, dtype=np.float64)
    t = np.asarray(times, dtype=np.float64)
    if len(v) == 0 or len(v) != len(t):
        raise ValueError("contour_stats needs equal-length nonempty inputs")
    i_min = int(np.argmin(v))
    i_max = int(np.argmax(v))
    mean = float(np.mean(v))
    centered = v - mean
    m2 = float(np.mean(centered**2))
    m3 = float(np.mean(centered**3))
    # guard the exponentiated denominator: m2 can be subnormal yet m2**1.5 == 0
    skew_den = m2**1.5
    skew = 0.0 if skew_den <= 0.0 else m3 / skew_den
    t_var = float(np.var(t))
    if len(v) < 2 or t_var <= 0.0:
        slope = 0.0
    else:
        slope = float(np.mean((t - t.mean()) * centered) / t_var)
    return ContourStats(
        minimum=float(v[i_min]),
        time_of_min=float(t[i_min]),
        maximum=float(v[i_max]),
        time_of_max=float(t[i_max]),
        mean=mean,
        median=float(np.median(v)),
        value_range=float(v[i_max] - v[i_min]),
        slope=slope,
        std=float(math.sqrt(m2)),
        skewness=skew,
    )


def compute_frame_track(buf: AudioBuffer, cfg: DspConfig = DspConfig()) -> FrameTrack:
    """All prosodic contours of one utterance on the shared frame grid."""
    rate = buf.sample_rate
    x = np.asarray(buf.samples, dtype=np.float64)
    frame_len = int(round(cfg.frame_s * rate))
    hop = int(round(cfg.hop_s * rate))
    if len(x) < frame_len:
        raise DataError(
            f"buffer of {len(x)} samples is shorter than one "
            f"{frame_len}-sample analysis frame"
        )
    frames = _frame_matrix(x, frame_len, hop)
    n = len(frames)
    times = (np.arange(n) * hop + frame_len / 2.0) / rate

    rms = np.sqrt(np.mean(frames * frames, axis=1))

    # pitch + voicing from the normalized autocorrelation rows
    r_all = _nccf_rows(frames)
    lag_lo = max(1, int(math.ceil(rate / cfg.fmax_hz)))
    lag_hi = min(frame_len - 1, int(math.floor(rate / cfg.fmin_hz)))
    pitch = np.full(n, np.nan)
    strength = np.zeros(n)
    if lag_lo <= lag_hi:
        for i in range(n):
            lag, s = _pick_peak(r_all[i], lag_lo, lag_hi)
            strength[i] = s
            if s >= cfg.voicing_threshold and lag > 0:
                pitch[i] = min(cfg.fmax_hz, max(cfg.fmin_hz, rate / lag))
    voiced = ~np.isnan(pitch)

    # band-limited RMS via FFT-bin masking on the raw frames
    spec = np.fft.rfft(frames, frame_len, axis=1)
    freqs = np.fft.rfftfreq(frame_len, d=1.0 / rate)
    spec[:, (freqs < cfg.band_lo_hz) | (freqs > cfg.band_hi_hz)] = 0.0
    band = np.fft.irfft(spec, frame_len, axis=1)
    band_rms_track = np.sqrt(np.mean(band * band, axis=1))

    tilt = np.full(n, np.nan)
    hnr_track = np.full(n, np.nan)
    for i in np.nonzero(voiced)[0]:
        t = spectral_tilt_h1h2(frames[i], rate, float(pitch[i]))
        if t is not None:
            tilt[i] = t
        hnr_track[i] = hnr_db_from_r(float(strength[i]))

    return FrameTrack(
        frame_times=times,
        pitch_hz=pitch,
        voicing_strength=strength,
        rms=rms,
        band_rms=band_rms_track,
        tilt_db=tilt,
        hnr_db=hnr_track,
    )


def detect_syllable_nuclei(
    buf: AudioBuffer,
    interval: tuple[float, float],
    track: FrameTrack,
    dip_db: float = 2.0,
) -> int:
    """Count syllable nuclei inside [start, end] seconds.

    A nucleus is an intensity peak that (a) exceeds the interval's
    median intensity, (b) is separated from the previously accepted
    peak by a dip at least dip_db below the lower of the two, and
    (c) falls on a voiced frame.  Rivaling peaks without a sufficient
    dip between them are merged, keeping the taller one.
    """
    start, end = interval
    sel = np.nonzero((track.frame_times >= start) & (track.frame_times <= end))[0]
    if len(sel) == 0:
        return 0
    intensity = 20.0 * np.log10(track.rms[sel] + _INTENSITY_FLOOR)
    voiced = track.voiced[sel]
    m = len(sel)
    median = float(np.median(intensity))

    # plateau-aware local maxima: runs of equal value count once, and
    # the interval edges act like -inf neighbors
    candidates = []
    i = 0
    while i < m:
        j = i
        while j + 1 < m and intensity[j + 1] == intensity[i]:
            j += 1
        left_ok = i == 0 or intensity[i - 1] < intensity[i]
        right_ok = j == m - 1 or intensity[j + 1] < intensity[j]
        if left_ok and right_ok:
            candidates.append((i + j) // 2)
        i = j + 1

    accepted: list[int] = []
    for p in candidates:
        if intensity[p] <= median or not voiced[p]:
            continue
        if not accepted:
            accepted.append(p)
            continue
        prev = accepted[-1]
        between = intensity[prev + 1 : p]
        valley = float(np.min(between)) if len(between) else math.inf
        if valley <= min(intensity[prev], intensity[p]) - dip_db:
            accepted.append(p)
        elif intensity[p] > intensity[prev]:
            accepted[-1] = p
    return len(accepted)
