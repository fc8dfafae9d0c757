"""Acoustic-prosodic word importance labeling for spoken dialogue turns.

Pipeline: WAV audio + word timestamps -> prosodic frame contours ->
per-word sub-word window features (+ lexical timing features, both
speaker-z-normalized) -> bi-GRU word encoder + BiLSTM tagger with a
softmax, ordinal, or CRF head -> LI/MI/HI labels per word.
"""

__version__ = "0.1.0"

from .audio import AudioBuffer, add_white_noise, load_wav, save_wav, slice_audio
from .dsp import (
    ContourStats,
    DspConfig,
    FrameTrack,
    band_rms,
    compute_frame_track,
    contour_stats,
    detect_syllable_nuclei,
    estimate_pitch,
    hnr,
    hnr_db_from_r,
    rms_energy,
    spectral_tilt_h1h2,
)
from .features import (
    ABLATION_GROUPS,
    FeatureMask,
    SpeakerStats,
    SubwordFeatureSeq,
    WordLexicalFeatures,
    WordTiming,
    assemble_utterance,
    fit_speaker_stats,
    full_mask,
    lexical_features,
    mask_without,
    subword_features,
    subword_windows,
    znorm_augment,
)
from .metrics import (
    AlignmentOp,
    MetricsReport,
    align_hypothesis,
    bin_score,
    metrics,
    project_labels,
    wer,
)
from .net import (
    LABEL_NAMES,
    ModelConfig,
    UtteranceInput,
    init_parameters,
    ordinal_decode,
    ordinal_targets,
    predict_utterance,
)
from .training import TrainConfig, TrainResult, train_model

__all__ = [
    "ABLATION_GROUPS",
    "AlignmentOp",
    "AudioBuffer",
    "ContourStats",
    "DspConfig",
    "FeatureMask",
    "FrameTrack",
    "LABEL_NAMES",
    "MetricsReport",
    "ModelConfig",
    "SpeakerStats",
    "SubwordFeatureSeq",
    "TrainConfig",
    "TrainResult",
    "UtteranceInput",
    "WordLexicalFeatures",
    "WordTiming",
    "add_white_noise",
    "align_hypothesis",
    "assemble_utterance",
    "band_rms",
    "bin_score",
    "compute_frame_track",
    "contour_stats",
    "detect_syllable_nuclei",
    "estimate_pitch",
    "fit_speaker_stats",
    "full_mask",
    "hnr",
    "hnr_db_from_r",
    "init_parameters",
    "lexical_features",
    "load_wav",
    "mask_without",
    "metrics",
    "ordinal_decode",
    "ordinal_targets",
    "predict_utterance",
    "project_labels",
    "rms_energy",
    "save_wav",
    "slice_audio",
    "spectral_tilt_h1h2",
    "subword_features",
    "subword_windows",
    "train_model",
    "wer",
    "znorm_augment",
]
