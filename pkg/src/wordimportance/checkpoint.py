"""Versioned JSON checkpoints: config echo, tensors, speaker stats, mask.

JSON float serialization round-trips float64 exactly (shortest-repr),
so save/load is lossless.  Loading rejects unknown versions and any
tensor whose shape disagrees with the stored config.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import CheckpointError
from .features import FeatureMask, SpeakerStats
from .net import ModelConfig, parameter_shapes

FORMAT_NAME = "wordimportance-checkpoint"
FORMAT_VERSION = 1


def save_checkpoint(
    path,
    cfg: ModelConfig,
    params: dict[str, np.ndarray],
    stats: SpeakerStats,
    mask: FeatureMask,
    meta: dict | None = None,
) -> None:
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "config": cfg.to_dict(),
        "feature_mask": mask.to_dict(),
        "speaker_stats": stats.to_dict(),
        "tensors": {
            name: {"shape": list(t.shape), "values": t.reshape(-1).tolist()}
            for name, t in sorted(params.items())
        },
        "meta": meta or {},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, separators=(",", ":"), sort_keys=True)
        fh.write("\n")


def load_checkpoint(path):
    """Returns (cfg, params, stats, mask, meta); raises CheckpointError."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: unreadable checkpoint ({exc})") from exc
    if doc.get("format") != FORMAT_NAME:
        raise CheckpointError(f"{path}: not a {FORMAT_NAME} file")
    if doc.get("version") != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: version {doc.get('version')!r} unsupported (want {FORMAT_VERSION})"
        )
    try:
        cfg = ModelConfig.from_dict(doc["config"])
        mask = FeatureMask.from_dict(doc["feature_mask"])
        stats = SpeakerStats.from_dict(doc["speaker_stats"])
        tensors = doc["tensors"]
    except (KeyError, TypeError) as exc:
        raise CheckpointError(f"{path}: missing checkpoint fields ({exc})") from exc

    expected = parameter_shapes(cfg)
    params: dict[str, np.ndarray] = {}
    for name, shape in expected.items():
        if name not in tensors:
            raise CheckpointError(f"{path}: tensor {name} missing")
        entry = tensors[name]
        if tuple(entry["shape"]) != shape:
            raise CheckpointError(
                f"{path}: tensor {name} has shape {tuple(entry['shape'])}, expected {shape}"
            )
        values = np.asarray(entry["values"], dtype=np.float64)
        if values.size != int(np.prod(shape)):
            raise CheckpointError(f"{path}: tensor {name} has wrong element count")
        params[name] = values.reshape(shape)
    return cfg, params, stats, mask, doc.get("meta", {})
