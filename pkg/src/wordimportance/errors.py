"""Exception types shared across the package.

Exit-code mapping used by the command line tool:
  configuration problems -> 2, data problems -> 3, internal failures -> 4.
"""


class ConfigError(Exception):
    """Invalid configuration: bad flag values, fractions, unknown groups."""


class DataError(Exception):
    """Invalid input data: corpora, audio files, hypothesis files."""


class WavFormatError(DataError):
    """File is not a well-formed RIFF/WAVE container."""


class UnsupportedWavError(DataError):
    """WAV encoding outside PCM 8/16/24-bit integer and 32-bit float."""


class SilentSignalError(DataError):
    """Operation requires a signal with nonzero power."""


class CorpusError(DataError):
    """Corpus file failed validation; message carries the line number."""


class CheckpointError(DataError):
    """Checkpoint file is malformed or incompatible with the model config."""


class TrainingDivergedError(Exception):
    """Loss became non-finite during optimization."""
