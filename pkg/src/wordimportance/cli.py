"""Command line interface.

Subcommands: synth-data, extract, train, evaluate, predict, align-eval,
ablate.  Exit codes: 0 success, 2 configuration error, 3 data error,
4 internal error.  Given identical flags and --seed, every subcommand
writes byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback

from . import pipeline
from .errors import ConfigError, DataError
from .features import ABLATION_GROUPS
from .net import HEAD_KINDS
from .pipeline import PipelineConfig
from .synth import synth_corpus

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


def _add_common(p: argparse.ArgumentParser, *names: str):
    if "corpus" in names:
        p.add_argument("--corpus", required=True, help="corpus JSONL file")
    if "out" in names:
        p.add_argument("--out", required=True, help="output file or directory")
    if "seed" in names:
        p.add_argument("--seed", type=int, default=0, help="master random seed")
    if "tau" in names:
        p.add_argument("--tau", type=float, default=0.050, help="sub-word window length (s)")
        p.add_argument("--hop", type=float, default=0.040, help="sub-word window hop (s)")
    if "jobs" in names:
        p.add_argument("--jobs", type=int, default=1, help="parallel workers for extraction")
    if "train" in names:
        p.add_argument("--head", choices=HEAD_KINDS, default="ordinal", help="projection head")
        p.add_argument("--trials", type=int, default=1, help="independently seeded training runs")
        p.add_argument("--max-epochs", type=int, default=200)
        p.add_argument("--patience", type=int, default=7, help="early-stop patience (epochs)")
        p.add_argument("--batch-max-turns", type=int, default=20)
        p.add_argument("--lr", type=float, default=0.001)
    if "checkpoint" in names:
        p.add_argument("--checkpoint", required=True, help="model checkpoint JSON")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="wordimportance",
        description="Acoustic word-importance labeling: features, training, evaluation.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-data", help="generate a synthetic labeled corpus")
    _add_common(p, "out", "seed")
    p.add_argument("--n", type=int, default=50, help="number of utterances")
    p.add_argument("--noisy", action="store_true", help="mix in white noise")
    p.add_argument("--snr-db", type=float, default=10.0, help="SNR for --noisy (dB)")

    p = sub.add_parser("extract", help="dump per-word features as columnar text")
    _add_common(p, "corpus", "out", "tau", "jobs")

    p = sub.add_parser("train", help="train a model and report test metrics")
    _add_common(p, "corpus", "out", "seed", "tau", "jobs", "train")

    p = sub.add_parser("evaluate", help="score a checkpoint on a corpus")
    _add_common(p, "corpus", "checkpoint", "jobs")
    p.add_argument("--out", help="write the metrics report JSON here")
    p.add_argument("--split", choices=pipeline.SPLIT_NAMES, default="all",
                   help="corpus subset (train/dev/test use the checkpoint's stored split seed)")

    p = sub.add_parser("predict", help="write per-word label predictions")
    _add_common(p, "corpus", "checkpoint", "out", "jobs")

    p = sub.add_parser("align-eval", help="score predictions on ASR hypothesis words")
    _add_common(p, "corpus", "checkpoint", "jobs")
    p.add_argument("--hyp", required=True, help="hypothesis JSONL (utterance_id, hyp_tokens)")
    p.add_argument("--out", help="write the metrics report JSON here")
    p.add_argument("--split", choices=pipeline.SPLIT_NAMES, default="all",
                   help="corpus subset (train/dev/test use the checkpoint's stored split seed)")
    p.add_argument("--exclude-insertions", action="store_true",
                   help="drop inserted hypothesis words from label scoring")

    p = sub.add_parser("ablate", help="retrain with one feature group removed")
    _add_common(p, "corpus", "out", "seed", "tau", "jobs", "train")
    p.add_argument("--group", required=True,
                   help=f"feature group to remove (one of {', '.join(ABLATION_GROUPS)})")
    return ap


def _pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    return PipelineConfig(
        head_kind=getattr(args, "head", "ordinal"),
        seed=getattr(args, "seed", 0),
        trials=getattr(args, "trials", 1),
        tau=args.tau,
        hop=args.hop,
        max_epochs=getattr(args, "max_epochs", 200),
        patience=getattr(args, "patience", 7),
        batch_max_turns=getattr(args, "batch_max_turns", 20),
        lr=getattr(args, "lr", 0.001),
        jobs=getattr(args, "jobs", 1),
    )


def _print_report(report) -> None:
    print(json.dumps(report.to_dict(), sort_keys=True))


def _run(args: argparse.Namespace) -> None:
    if args.command == "synth-data":
        snr = args.snr_db if args.noisy else None
        utts, path = synth_corpus(args.out, args.n, seed=args.seed, noisy_snr_db=snr)
        print(f"wrote {len(utts)} utterances to {path}")
    elif args.command == "extract":
        cfg = PipelineConfig(tau=args.tau, hop=args.hop, jobs=args.jobs)
        paths = pipeline.run_extract(args.corpus, args.out, cfg)
        print(f"wrote {len(paths)} feature dumps to {args.out}")
    elif args.command == "train":
        summary = pipeline.run_training(args.corpus, args.out, _pipeline_config(args))
        mean = summary["test_mean"]
        print(
            f"head={summary['head']} trials={summary['trials']} "
            f"test acc={mean['acc']:.2f} macro_f1={mean['macro_f1']:.2f} rms={mean['rms']:.2f}"
        )
    elif args.command == "evaluate":
        report = pipeline.run_evaluation(
            args.corpus, args.checkpoint, out_path=args.out, split=args.split, jobs=args.jobs
        )
        _print_report(report)
    elif args.command == "predict":
        n = pipeline.run_prediction(args.corpus, args.checkpoint, args.out, jobs=args.jobs)
        print(f"wrote predictions for {n} words to {args.out}")
    elif args.command == "align-eval":
        report = pipeline.run_align_eval(
            args.corpus,
            args.checkpoint,
            args.hyp,
            out_path=args.out,
            include_insertions=not args.exclude_insertions,
            split=args.split,
            jobs=args.jobs,
        )
        _print_report(report)
    elif args.command == "ablate":
        summary = pipeline.run_ablation(args.corpus, args.out, args.group, _pipeline_config(args))
        mean = summary["test_mean"]
        print(
            f"group={summary['group']} n_features={summary['n_features']} "
            f"test acc={mean['acc']:.2f} macro_f1={mean['macro_f1']:.2f} rms={mean['rms']:.2f}"
        )
    else:  # pragma: no cover - argparse enforces the choices
        raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _run(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - boundary of the program
        traceback.print_exc()
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
