"""Labeled-corpus JSONL I/O and deterministic splitting.

One JSON record per line:
  {"utterance_id": ..., "speaker_id": ..., "audio_path": ...,
   "words": [{"token": ..., "start_s": ..., "end_s": ..., "score": ...}, ...]}

audio_path may be absolute or relative to the corpus file's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, CorpusError, DataError
from .features import WordTiming


@dataclass
class LabeledUtterance:
    utterance_id: str
    speaker_id: str
    audio_path: str
    words: list[WordTiming]
    scores: list[float]

    def to_json(self) -> str:
        rec = {
            "utterance_id": self.utterance_id,
            "speaker_id": self.speaker_id,
            "audio_path": self.audio_path,
            "words": [
                {"token": w.token, "start_s": w.start, "end_s": w.end, "score": s}
                for w, s in zip(self.words, self.scores)
            ],
        }
        return json.dumps(rec, sort_keys=True)


def _require(cond: bool, line_no: int, msg: str):
    if not cond:
        raise CorpusError(f"line {line_no}: {msg}")


def load_corpus(path) -> list[LabeledUtterance]:
    """Parse and validate a corpus JSONL file; errors carry line numbers."""
    utts: list[LabeledUtterance] = []
    try:
        fh = open(path)
    except OSError as exc:
        raise DataError(f"cannot open corpus {path}: {exc}") from exc
    with fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {line_no}: invalid JSON ({exc})") from exc
            _require(isinstance(rec, dict), line_no, "record must be an object")
            for key in ("utterance_id", "speaker_id", "audio_path", "words"):
                _require(key in rec, line_no, f"missing field {key!r}")
            _require(isinstance(rec["words"], list), line_no, "words must be a list")
            words: list[WordTiming] = []
            scores: list[float] = []
            prev_end = -float("inf")
            for k, w in enumerate(rec["words"]):
                _require(isinstance(w, dict), line_no, f"word {k} must be an object")
                for key in ("token", "start_s", "end_s", "score"):
                    _require(key in w, line_no, f"word {k} missing field {key!r}")
                start, end, score = float(w["start_s"]), float(w["end_s"]), float(w["score"])
                _require(start < end, line_no, f"word {k}: start_s {start} must be < end_s {end}")
                _require(
                    start >= prev_end - 1e-9,
                    line_no,
                    f"word {k} at {start}s overlaps the previous word ending {prev_end}s",
                )
                _require(0.0 <= score <= 1.0, line_no, f"word {k}: score {score} outside [0, 1]")
                words.append(WordTiming(token=str(w["token"]), start=start, end=end))
                scores.append(score)
                prev_end = end
            utts.append(
                LabeledUtterance(
                    utterance_id=str(rec["utterance_id"]),
                    speaker_id=str(rec["speaker_id"]),
                    audio_path=str(rec["audio_path"]),
                    words=words,
                    scores=scores,
                )
            )
    return utts


def save_corpus(utts: list[LabeledUtterance], path) -> None:
    with open(path, "w") as fh:
        for u in utts:
            fh.write(u.to_json() + "\n")


def resolve_audio_path(corpus_path, audio_path: str) -> Path:
    p = Path(audio_path)
    return p if p.is_absolute() else Path(corpus_path).parent / p


def split_corpus(
    utts: list[LabeledUtterance],
    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
):
    """Seeded shuffle, then contiguous train/dev/test split.

    Dev and test sizes floor; the remainder goes to train, so 10
    utterances split 8/1/1.
    """
    if len(fractions) != 3 or any(f < 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise ConfigError(f"split fractions must be >= 0 and sum to 1, got {fractions}")
    n = len(utts)
    if n < 3:
        raise DataError(f"corpus of {n} utterances is too small to split three ways")
    order = np.random.default_rng(seed).permutation(n)
    n_dev = int(fractions[1] * n)
    n_test = int(fractions[2] * n)
    n_train = n - n_dev - n_test
    shuffled = [utts[i] for i in order]
    return (
        shuffled[:n_train],
        shuffled[n_train : n_train + n_dev],
        shuffled[n_train + n_dev :],
    )
