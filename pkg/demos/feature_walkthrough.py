"""
From waveform to word features, step by step
============================================

Builds one synthetic dialogue turn, then walks a single word through
the whole measurement chain: sub-word windows, the per-window acoustic
vector, the per-word lexical vector, and speaker z-normalization.
"""

import tempfile
from pathlib import Path

import numpy as np

from wordimportance.audio import load_wav
from wordimportance.dsp import DspConfig, compute_frame_track
from wordimportance.features import (
    N_LEXICAL_RAW,
    N_WINDOW_RAW,
    extract_raw_utterance,
    subword_windows,
)
from wordimportance.synth import synth_corpus

# Slot layout of the 24 raw window statistics: two contour-stat decades
# (pitch over voiced frames, RMS energy over all frames), then the
# scalar band/voice-quality summaries.
CONTOUR_FIELDS = ["min", "t(min)", "max", "t(max)", "mean", "median",
                  "range", "slope", "std", "skew"]
WINDOW_SLOTS = (
    [f"pitch {f}" for f in CONTOUR_FIELDS]
    + [f"energy {f}" for f in CONTOUR_FIELDS]
    + ["band 0.5-2k rms", "tilt H1-H2 dB", "HNR dB", "voiced fraction"]
)
LEXICAL_SLOTS = ["duration s", "turn position", "silence before s",
                 "syllable count", "mean syllable s", "syllables/s"]

# A tiny corpus: one speaker, harmonic tone-burst "words" whose length,
# loudness and pitch movement encode the importance label.
root = Path(tempfile.mkdtemp(prefix="walkthrough_"))
utts, corpus_path = synth_corpus(root, 1, seed=4)
utt = utts[0]
print(f"utterance {utt.utterance_id}, speaker {utt.speaker_id}")
print(f"tokens: {[w.token for w in utt.words]}")
print(f"scores: {utt.scores}")

# Load the audio and compute the shared frame-level contours once.
buf = load_wav(root / utt.audio_path)
track = compute_frame_track(buf, DspConfig())
print(f"\naudio: {buf.duration:.2f} s at {buf.sample_rate} Hz, "
      f"{len(track.frame_times)} analysis frames")

# Pick the longest word; long words carry several sub-word windows.
idx = max(range(len(utt.words)), key=lambda i: utt.words[i].duration)
word = utt.words[idx]
print(f"\nchosen word {word.token!r}: {word.start:.3f} -> {word.end:.3f} s")

# Sub-word windows: tau-long spans hopped across the word interval.
spans = subword_windows(word, tau=0.05, hop=0.04)
print(f"{len(spans)} windows of 50 ms, 40 ms hop:")
for lo, hi in spans:
    print(f"  {lo:.3f} -> {hi:.3f} s")

# Each window is summarized by pitch, energy, voicing and voice-quality
# statistics. The first window's vector, with names:
raw_utt = extract_raw_utterance(buf, utt.words, utt.utterance_id, utt.speaker_id)
raw = raw_utt.words[idx]
print(f"\nwindow vector has {N_WINDOW_RAW} raw statistics; first window:")
for name, value in zip(WINDOW_SLOTS, raw.raw_windows[0]):
    print(f"  {name:18s} {value: .4f}")

# The per-word lexical vector depends only on timing and syllable
# counts, never on the token identity.
print(f"\nlexical vector ({N_LEXICAL_RAW} values):")
for name, value in zip(LEXICAL_SLOTS, raw.raw_lexical):
    print(f"  {name:18s} {value: .4f}")

# Speaker z-normalization doubles each block: raw values concatenated
# with per-speaker standardized copies, so the model sees both the
# absolute measurement and where it sits in the speaker's range.
print(f"\nwindow block: {N_WINDOW_RAW} raw dims -> {2 * N_WINDOW_RAW} z-augmented")
print(f"lexical block: {N_LEXICAL_RAW} raw dims -> {2 * N_LEXICAL_RAW} z-augmented")
print("mean absolute raw window value:",
      f"{float(np.mean(np.abs(raw.raw_windows))):.4f}")
