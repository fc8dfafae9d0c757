"""WAV loading, slicing, and noise injection.

The reader walks RIFF chunks directly so that 24-bit PCM (common in
field recordings) works without extra dependencies.  All audio becomes
a mono float64 array in [-1, 1]; integer samples are scaled by the
signed range of the bit depth (2**(bits-1)).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .errors import SilentSignalError, UnsupportedWavError, WavFormatError

_PCM = 1
_IEEE_FLOAT = 3


@dataclass(frozen=True)
class AudioBuffer:
    """Mono audio: float64 samples in [-1, 1] plus a sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def __len__(self) -> int:
        return len(self.samples)


def load_wav(path) -> AudioBuffer:
    """Read a RIFF/WAVE file into an AudioBuffer.

    Supports PCM at 8, 16, and 24 bits and IEEE float at 32 bits.
    Multi-channel input is mixed down by averaging channels.
    Raises FileNotFoundError, WavFormatError, or UnsupportedWavError.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise WavFormatError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body_start = pos + 8
        if body_start + chunk_size > len(data):
            raise WavFormatError(f"{path}: truncated {chunk_id!r} chunk")
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                raise WavFormatError(f"{path}: fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", data, body_start)
        elif chunk_id == b"data":
            payload = data[body_start : body_start + chunk_size]
        # chunks are word-aligned: odd sizes carry a pad byte
        pos = body_start + chunk_size + (chunk_size & 1)

    if fmt is None or payload is None:
        raise WavFormatError(f"{path}: missing fmt or data chunk")

    audio_format, n_channels, sample_rate, _, _, bits = fmt
    if n_channels < 1 or sample_rate <= 0:
        raise WavFormatError(f"{path}: invalid fmt fields")

    if audio_format == _PCM and bits == 8:
        raw = np.frombuffer(payload, dtype=np.uint8).astype(np.float64)
        samples = (raw - 128.0) / 128.0
    elif audio_format == _PCM and bits == 16:
        raw = np.frombuffer(payload[: len(payload) - len(payload) % 2], dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif audio_format == _PCM and bits == 24:
        usable = len(payload) - len(payload) % 3
        b = np.frombuffer(payload[:usable], dtype=np.uint8).reshape(-1, 3)
        val = (
            b[:, 0].astype(np.int32)
            | (b[:, 1].astype(np.int32) << 8)
            | (b[:, 2].astype(np.int32) << 16)
        )
        val = np.where(val >= 1 << 23, val - (1 << 24), val)
        samples = val.astype(np.float64) / float(1 << 23)
    elif audio_format == _IEEE_FLOAT and bits == 32:
        raw = np.frombuffer(payload[: len(payload) - len(payload) % 4], dtype="<f4")
        samples = raw.astype(np.float64)
    else:
        raise UnsupportedWavError(
            f"{path}: unsupported encoding (format={audio_format}, bits={bits})"
        )

    if n_channels > 1:
        usable = len(samples) - len(samples) % n_channels
        samples = samples[:usable].reshape(-1, n_channels).mean(axis=1)

    return AudioBuffer(samples=samples, sample_rate=int(sample_rate))


def save_wav(buf: AudioBuffer, path, bits: int = 16) -> None:
    """Write an AudioBuffer as mono PCM (8/16/24 bit) or 32-bit float."""
    x = np.asarray(buf.samples, dtype=np.float64)
    if bits == 8:
        raw = np.clip(np.rint(x * 128.0) + 128.0, 0, 255).astype(np.uint8)
        payload = raw.tobytes()
        fmt_code, block = _PCM, 1
    elif bits == 16:
        raw = np.clip(np.rint(x * 32768.0), -32768, 32767).astype("<i2")
        payload = raw.tobytes()
        fmt_code, block = _PCM, 2
    elif bits == 24:
        val = np.clip(np.rint(x * float(1 << 23)), -(1 << 23), (1 << 23) - 1)
        val = val.astype(np.int32)
        val = np.where(val < 0, val + (1 << 24), val).astype(np.uint32)
        b = np.empty((len(val), 3), dtype=np.uint8)
        b[:, 0] = val & 0xFF
        b[:, 1] = (val >> 8) & 0xFF
        b[:, 2] = (val >> 16) & 0xFF
        payload = b.tobytes()
        fmt_code, block = _PCM, 3
    elif bits == 32:
        payload = x.astype("<f4").tobytes()
        fmt_code, block = _IEEE_FLOAT, 4
    else:
        raise UnsupportedWavError(f"cannot write {bits}-bit WAV")

    rate = buf.sample_rate
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    header += b"fmt " + struct.pack(
        "<IHHIIHH", 16, fmt_code, 1, rate, rate * block, block, bits
    )
    header += b"data" + struct.pack("<I", len(payload))
    with open(path, "wb") as fh:
        fh.write(header + payload)


def slice_audio(buf: AudioBuffer, start_s: float, end_s: float) -> AudioBuffer:
    """Extract [start_s, end_s) as a new buffer (indices floored)."""
    if not (0.0 <= start_s < end_s):
        raise ValueError(f"bad slice interval [{start_s}, {end_s})")
    if end_s > buf.duration + 1e-9:
        raise ValueError(
            f"slice end {end_s} s beyond buffer duration {buf.duration} s"
        )
    lo = int(math.floor(start_s * buf.sample_rate))
    hi = int(math.floor(end_s * buf.sample_rate))
    hi = min(hi, len(buf.samples))
    return AudioBuffer(samples=buf.samples[lo:hi].copy(), sample_rate=buf.sample_rate)


def add_white_noise(buf: AudioBuffer, snr_db: float, seed: int) -> AudioBuffer:
    """Return a copy with Gaussian noise mixed in at exactly snr_db.

    The noise is rescaled from its measured (not nominal) power, so the
    realized signal-to-noise ratio equals the request regardless of the
    draw.  Raises SilentSignalError when the input has zero power.
    """
    if not math.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite, got {snr_db}")
    x = buf.samples
    p_signal = float(np.mean(x * x))
    if p_signal <= 0.0:
        raise SilentSignalError("cannot set an SNR against a zero-power signal")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(len(x))
    p_noise = float(np.mean(noise * noise))
    if p_noise <= 0.0:  # len(x) == 0 is excluded above; guard anyway
        raise SilentSignalError("degenerate noise draw")
    target = p_signal / (10.0 ** (snr_db / 10.0))
    noise *= math.sqrt(target / p_noise)
    return AudioBuffer(samples=x + noise, sample_rate=buf.sample_rate)
