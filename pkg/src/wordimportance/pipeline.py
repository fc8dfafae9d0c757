"""End-to-end plumbing: corpus -> features -> model -> reports.

All randomness descends from one user seed through fixed offsets, so
each stage is independently reproducible:

  split shuffle   seed + 1000
  parameter init  seed + 2000 (+ 101 per extra trial)
  batch shuffle   seed + 3000 (+ 101 per extra trial)
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .audio import load_wav
from .checkpoint import load_checkpoint, save_checkpoint
from .corpus import LabeledUtterance, load_corpus, resolve_audio_path, split_corpus
from .dsp import DspConfig
from .errors import ConfigError, DataError
from .features import (
    FeatureMask,
    RawUtteranceFeatures,
    SpeakerStats,
    WordTiming,
    augment_utterance,
    extract_raw_utterance,
    fit_speaker_stats,
    format_feature_dump,
    mask_without,
)
from .metrics import MetricsReport, align_hypothesis, bin_score, metrics, project_labels
from .net import LABEL_NAMES, ModelConfig, UtteranceInput, predict_utterance
from .training import TrainConfig, TrainResult, evaluate_dataset, train_model

SEED_SPLIT_OFFSET = 1000
SEED_INIT_OFFSET = 2000
SEED_SHUFFLE_OFFSET = 3000
TRIAL_SEED_STRIDE = 101

SPLIT_NAMES = ("all", "train", "dev", "test")


@dataclass(frozen=True)
class PipelineConfig:
    head_kind: str = "ordinal"
    seed: int = 0
    trials: int = 1
    group: str | None = None  # ablation group, None = full features
    tau: float = 0.050
    hop: float = 0.040
    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)
    max_epochs: int = 200
    patience: int = 7
    batch_max_turns: int = 20
    lr: float = 0.001
    jobs: int = 1
    dsp: DspConfig = DspConfig()


def _extract_one(args) -> RawUtteranceFeatures:
    utt, corpus_path, dsp_cfg, tau, hop = args
    wav_path = resolve_audio_path(corpus_path, utt.audio_path)
    try:
        buf = load_wav(wav_path)
    except FileNotFoundError as exc:
        raise DataError(f"{utt.utterance_id}: audio file {wav_path} not found") from exc
    return extract_raw_utterance(
        buf, utt.words, utt.utterance_id, utt.speaker_id, dsp_cfg, tau, hop
    )


def extract_features(
    utts: list[LabeledUtterance],
    corpus_path,
    dsp_cfg: DspConfig,
    tau: float,
    hop: float,
    jobs: int = 1,
) -> list[RawUtteranceFeatures]:
    """Raw features per utterance, order-preserving, optionally parallel."""
    work = [(u, str(corpus_path), dsp_cfg, tau, hop) for u in utts]
    if jobs <= 1 or len(work) < 2:
        return [_extract_one(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_extract_one, work, chunksize=4))


def gold_labels(utt: LabeledUtterance) -> np.ndarray:
    return np.array([bin_score(s) for s in utt.scores], dtype=int)


def build_inputs(
    raws: list[RawUtteranceFeatures], stats: SpeakerStats, mask: FeatureMask
) -> list[UtteranceInput]:
    inputs = []
    for raw in raws:
        bundles = augment_utterance(raw, stats)
        windows = [mask.apply_windows(seq.windows) for seq, _ in bundles]
        lex = (
            np.stack([mask.apply_lexical(lf.vector) for _, lf in bundles])
            if bundles
            else np.zeros((0, mask.n_lexical))
        )
        inputs.append(UtteranceInput(windows=windows, lexical=lex))
    return inputs


def _dump_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_extract(corpus_path, out_dir, cfg: PipelineConfig) -> list[Path]:
    """Write one feature-dump file per utterance; returns the paths."""
    utts = load_corpus(corpus_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    raws = extract_features(utts, corpus_path, cfg.dsp, cfg.tau, cfg.hop, cfg.jobs)
    stats = fit_speaker_stats(raws)
    paths = []
    for utt, raw in zip(utts, raws):
        bundles = augment_utterance(raw, stats)
        text = format_feature_dump(
            utt.utterance_id, utt.speaker_id, bundles, [w.token for w in utt.words]
        )
        path = out_dir / f"{utt.utterance_id}.feats"
        path.write_text(text)
        paths.append(path)
    return paths


def _split_indexed(utts, cfg: PipelineConfig):
    train, dev, test = split_corpus(utts, cfg.fractions, cfg.seed + SEED_SPLIT_OFFSET)
    return {"train": train, "dev": dev, "test": test}


def run_training(corpus_path, out_dir, cfg: PipelineConfig) -> dict:
    """Full training: split, fit stats on train, train, report on test.

    Writes checkpoint(.json), training_log(.jsonl), train_summary.json.
    Trial k > 0 appends -trial{k} to the artifact names.
    """
    if cfg.trials < 1:
        raise ConfigError("trials must be >= 1")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    utts = load_corpus(corpus_path)
    splits = _split_indexed(utts, cfg)
    raws = {
        name: extract_features(part, corpus_path, cfg.dsp, cfg.tau, cfg.hop, cfg.jobs)
        for name, part in splits.items()
    }
    stats = fit_speaker_stats(raws["train"])
    group = cfg.group.upper() if cfg.group else None
    mask = mask_without(group)
    datasets = {
        name: list(zip(build_inputs(raws[name], stats, mask),
                       [gold_labels(u) for u in splits[name]]))
        for name in splits
    }

    provenance = {
        "record": "provenance",
        "train_ids": [u.utterance_id for u in splits["train"]],
        "dev_ids": [u.utterance_id for u in splits["dev"]],
        "test_ids": [u.utterance_id for u in splits["test"]],
        "stats_fitted_on": [u.utterance_id for u in splits["train"]],
        "head": cfg.head_kind,
        "seed": cfg.seed,
        "group": group,
    }

    trial_reports = []
    for k in range(cfg.trials):
        model_cfg = ModelConfig(
            subword_input_dim=mask.n_window,
            lexical_dim=mask.n_lexical,
            head_kind=cfg.head_kind,
            seed=cfg.seed + SEED_INIT_OFFSET + k * TRIAL_SEED_STRIDE,
        )
        train_cfg = TrainConfig(
            head_kind=cfg.head_kind,
            batch_max_turns=cfg.batch_max_turns,
            patience=cfg.patience,
            lr=cfg.lr,
            max_epochs=cfg.max_epochs,
            seed=cfg.seed + SEED_SHUFFLE_OFFSET + k * TRIAL_SEED_STRIDE,
            fractions=cfg.fractions,
            tau=cfg.tau,
            hop=cfg.hop,
        )
        result = train_model(datasets["train"], datasets["dev"], model_cfg, train_cfg)
        test_report = evaluate_dataset(result.params, model_cfg, datasets["test"])
        train_report = evaluate_dataset(result.params, model_cfg, datasets["train"])

        suffix = "" if k == 0 else f"-trial{k}"
        meta = {
            "corpus": Path(corpus_path).name,
            "head": cfg.head_kind,
            "seed": cfg.seed,
            "trial": k,
            "group": group,
            "tau": cfg.tau,
            "hop": cfg.hop,
            "fractions": list(cfg.fractions),
            "dsp": asdict(cfg.dsp),
            "best_epoch": result.best_epoch,
            "best_dev_rms": result.best_dev_rms,
        }
        save_checkpoint(out_dir / f"checkpoint{suffix}.json", model_cfg, result.params, stats, mask, meta)
        with open(out_dir / f"training_log{suffix}.jsonl", "w") as fh:
            fh.write(json.dumps(provenance, sort_keys=True) + "\n")
            for rec in result.log:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
            final = {
                "record": "result",
                "best_epoch": result.best_epoch,
                "best_dev_rms": result.best_dev_rms,
                "epochs_run": result.epochs_run,
                "test": test_report.to_dict(),
                "train_acc": train_report.acc,
            }
            fh.write(json.dumps(final, sort_keys=True) + "\n")
        trial_reports.append(
            {
                "trial": k,
                "best_epoch": result.best_epoch,
                "epochs_run": result.epochs_run,
                "best_dev_rms": result.best_dev_rms,
                "train_acc": train_report.acc,
                "test": test_report.to_dict(),
            }
        )

    tests = [t["test"] for t in trial_reports]
    summary = {
        "head": cfg.head_kind,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "group": group,
        "n_window_features": mask.n_window,
        "n_lexical_features": mask.n_lexical,
        "n_features": mask.n_window + mask.n_lexical,
        "per_trial": trial_reports,
        "test_mean": {
            key: float(np.mean([t[key] for t in tests])) for key in ("acc", "macro_f1", "rms")
        },
        "test_std": {
            key: float(np.std([t[key] for t in tests])) for key in ("acc", "macro_f1", "rms")
        },
    }
    _dump_json(out_dir / "train_summary.json", summary)
    return summary


def _load_eval_bundle(checkpoint_path):
    cfg, params, stats, mask, meta = load_checkpoint(checkpoint_path)
    dsp_cfg = DspConfig(**meta["dsp"]) if "dsp" in meta else DspConfig()
    tau = meta.get("tau", 0.050)
    hop = meta.get("hop", 0.040)
    return cfg, params, stats, mask, meta, dsp_cfg, tau, hop


def _select_split(utts, meta, split: str, pipeline_seed: int | None):
    if split == "all":
        return utts
    seed = meta.get("seed") if pipeline_seed is None else pipeline_seed
    if seed is None:
        raise ConfigError("checkpoint lacks a stored seed; pass one to select a split")
    fractions = tuple(meta.get("fractions", (0.8, 0.1, 0.1)))
    train, dev, test = split_corpus(utts, fractions, seed + SEED_SPLIT_OFFSET)
    return {"train": train, "dev": dev, "test": test}[split]


def run_evaluation(
    corpus_path,
    checkpoint_path,
    out_path=None,
    split: str = "all",
    seed: int | None = None,
    jobs: int = 1,
) -> MetricsReport:
    """Decode a corpus (or one of its splits) and score against gold."""
    if split not in SPLIT_NAMES:
        raise ConfigError(f"split must be one of {SPLIT_NAMES}, got {split!r}")
    cfg, params, stats, mask, meta, dsp_cfg, tau, hop = _load_eval_bundle(checkpoint_path)
    utts = _select_split(load_corpus(corpus_path), meta, split, seed)
    if not utts:
        raise DataError(f"split {split!r} selected no utterances")
    raws = extract_features(utts, corpus_path, dsp_cfg, tau, hop, jobs)
    inputs = build_inputs(raws, stats, mask)
    gold: list[int] = []
    pred: list[int] = []
    for utt, inp in zip(utts, inputs):
        gold.extend(gold_labels(utt))
        pred.extend(int(y) for y in predict_utterance(params, cfg, inp))
    report = metrics(gold, pred)
    if out_path is not None:
        _dump_json(out_path, report.to_dict())
    return report


def run_prediction(corpus_path, checkpoint_path, out_path, jobs: int = 1) -> int:
    """Write per-word label predictions as JSONL; returns word count."""
    cfg, params, stats, mask, meta, dsp_cfg, tau, hop = _load_eval_bundle(checkpoint_path)
    utts = load_corpus(corpus_path)
    raws = extract_features(utts, corpus_path, dsp_cfg, tau, hop, jobs)
    inputs = build_inputs(raws, stats, mask)
    n_words = 0
    with open(out_path, "w") as fh:
        for utt, inp in zip(utts, inputs):
            labels = [LABEL_NAMES[int(y)] for y in predict_utterance(params, cfg, inp)]
            n_words += len(labels)
            fh.write(
                json.dumps(
                    {
                        "utterance_id": utt.utterance_id,
                        "tokens": [w.token for w in utt.words],
                        "labels": labels,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    return n_words


def load_hypotheses(path) -> dict[str, dict]:
    """ASR hypothesis JSONL: utterance_id, hyp_tokens, hyp_word_times?."""
    out: dict[str, dict] = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise DataError(f"cannot open hypothesis file {path}: {exc}") from exc
    with fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {line_no}: invalid JSON ({exc})") from exc
            if "utterance_id" not in rec or "hyp_tokens" not in rec:
                raise DataError(f"{path}: line {line_no}: need utterance_id and hyp_tokens")
            times = rec.get("hyp_word_times")
            if times is not None and len(times) != len(rec["hyp_tokens"]):
                raise DataError(
                    f"{path}: line {line_no}: hyp_word_times length != hyp_tokens length"
                )
            out[str(rec["utterance_id"])] = rec
    return out


def _hyp_word_timings(utt: LabeledUtterance, rec: dict, audio_dur: float) -> list[WordTiming]:
    tokens = [str(t) for t in rec["hyp_tokens"]]
    times = rec.get("hyp_word_times")
    words = []
    if times is not None:
        for tok, (s, e) in zip(tokens, times):
            words.append(WordTiming(token=tok, start=float(s), end=float(e)))
    elif tokens:
        # no recognizer timings: share the reference speech span evenly
        span_lo = utt.words[0].start if utt.words else 0.0
        span_hi = utt.words[-1].end if utt.words else audio_dur
        edges = np.linspace(span_lo, span_hi, len(tokens) + 1)
        for k, tok in enumerate(tokens):
            words.append(WordTiming(token=tok, start=float(edges[k]), end=float(edges[k + 1])))
    return words


def run_align_eval(
    corpus_path,
    checkpoint_path,
    hyp_path,
    out_path=None,
    include_insertions: bool = True,
    split: str = "all",
    seed: int | None = None,
    jobs: int = 1,
) -> MetricsReport:
    """Score predictions made on ASR hypothesis words against gold.

    Hypothesis tokens are aligned to the reference by minimum edit
    distance; inserted words count against gold LI, deleted gold words
    against predicted LI.  The report includes the micro-averaged WER.
    """
    if split not in SPLIT_NAMES:
        raise ConfigError(f"split must be one of {SPLIT_NAMES}, got {split!r}")
    cfg, params, stats, mask, meta, dsp_cfg, tau, hop = _load_eval_bundle(checkpoint_path)
    utts = _select_split(load_corpus(corpus_path), meta, split, seed)
    if not utts:
        raise DataError(f"split {split!r} selected no utterances")
    hyps = load_hypotheses(hyp_path)
    missing = [u.utterance_id for u in utts if u.utterance_id not in hyps]
    if missing:
        raise DataError(f"hypothesis file lacks utterances: {', '.join(missing[:5])}")

    gold_all: list[int] = []
    pred_all: list[int] = []
    n_err = 0
    n_ref = 0
    for utt in utts:
        rec = hyps[utt.utterance_id]
        buf = load_wav(resolve_audio_path(corpus_path, utt.audio_path))
        hyp_words = _hyp_word_timings(utt, rec, buf.duration)
        if hyp_words:
            raw = extract_raw_utterance(
                buf, hyp_words, utt.utterance_id, utt.speaker_id, dsp_cfg, tau, hop
            )
            bundles = augment_utterance(raw, stats)
            inp = UtteranceInput(
                windows=[mask.apply_windows(seq.windows) for seq, _ in bundles],
                lexical=np.stack([mask.apply_lexical(lf.vector) for _, lf in bundles]),
            )
            hyp_pred = [int(y) for y in predict_utterance(params, cfg, inp)]
        else:
            hyp_pred = []
        ref_tokens = [w.token for w in utt.words]
        alignment = align_hypothesis(ref_tokens, [w.token for w in hyp_words])
        g, p = project_labels(alignment, list(gold_labels(utt)), hyp_pred, include_insertions)
        gold_all.extend(g)
        pred_all.extend(p)
        n_err += sum(1 for op in alignment if op.kind != "match")
        n_ref += len(ref_tokens)

    if n_ref == 0:
        raise DataError("no reference words to score")
    report = metrics(gold_all, pred_all)
    report.wer = n_err / n_ref
    if out_path is not None:
        _dump_json(out_path, report.to_dict())
    return report


def run_ablation(corpus_path, out_dir, group: str, cfg: PipelineConfig) -> dict:
    """Retrain with one feature group removed; returns the summary."""
    return run_training(corpus_path, out_dir, replace(cfg, group=group.upper()))
