"""Command-line entry point.

Subcommands: gen-data, eval-classifiers, label-session, serve, report.
Every run is deterministic given explicit seeds; each invocation writes a
machine-readable ``manifest.json`` (command, flags, outputs) into --out.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__


def parse_snr_range(text: str) -> tuple[float, ...]:
    """'start:step:end' (inclusive) or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return (float(parts[0]),)
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"bad SNR range {text!r}: expected start:step:end or a single value"
        )
    start, step, end = (float(p) for p in parts)
    if step <= 0:
        raise argparse.ArgumentTypeError("SNR range step must be positive")
    values = []
    v = start
    while v <= end + 1e-9:
        values.append(round(v, 6))
        v += step
    return tuple(values)


def _write_manifest(out_dir: Path, command: str, args: dict, outputs: list) -> None:
    manifest = {
        "tool": "rflabel",
        "version": __version__,
        "command": command,
        "args": args,
        "outputs": sorted(str(Path(p).name) for p in outputs),
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _dataset_spec(args) -> "DatasetSpec":
    from .dataset import DatasetSpec

    return DatasetSpec(
        snr_list=tuple(args.snr),
        frames_per_couplet_per_snr=args.frames,
        frame_len=args.frame_len,
        master_seed=args.seed,
        total_frames=args.total,
    )


def cmd_gen_data(args) -> int:
    from .dataset import build_dataset, save_dataset
    from .features import write_feature_csv

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ds = build_dataset(_dataset_spec(args))
    outputs = [out / "dataset.iqds"]
    save_dataset(ds, outputs[0])
    if args.features:
        outputs.append(out / "features.csv")
        write_feature_csv(outputs[-1], ds.frames)
    _write_manifest(out, "gen-data", _public_args(args), outputs)
    print(f"wrote {len(ds)} frames to {outputs[0]}")
    return 0


def cmd_eval_classifiers(args) -> int:
    from .dataset import build_dataset, load_dataset
    from .reporting import (accuracy_table, export_accuracy_table,
                            export_size_report, model_size_report)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.dataset:
        ds = load_dataset(args.dataset)
    else:
        ds = build_dataset(_dataset_spec(args))
    table = accuracy_table(ds, split_seed=args.split_seed)
    outputs = export_accuracy_table(table, out)
    ref_snr = max(table.snrs)
    sizes = model_size_report(ds, snr=ref_snr, split_seed=args.split_seed)
    outputs += export_size_report(sizes, out)
    _write_manifest(out, "eval-classifiers", _public_args(args), outputs)
    for i, snr in enumerate(table.snrs):
        row = "  ".join(f"{n}={table.accuracies[n][i]:6.2f}%" for n in table.accuracies)
        print(f"SNR {snr:5.1f} dB: {row}")
    return 0


def cmd_label_session(args) -> int:
    from .dataset import build_dataset, load_dataset
    from .oracle import AuditLog, SimulatedOracle
    from .reporting import export_session_outputs, model_label_ratio
    from .session import LoopConfig, run_session

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.dataset:
        ds = load_dataset(args.dataset)
    else:
        ds = build_dataset(_dataset_spec(args))
    config = LoopConfig(
        page_size=args.page_size,
        restart_threshold=args.restart_threshold,
        buffer_capacity=args.buffer_capacity,
        bootstrap_count=args.bootstrap,
        selection_policy=args.policy,
        max_iterations=args.max_iterations,
        scorer_kind=args.scorer,
    )
    audit = AuditLog(args.audit_log) if args.audit_log else None
    oracle = SimulatedOracle(
        truth=ds.truth_map(),
        couplets=ds.spec.couplets,
        error_rate=args.error_rate,
        seed=args.oracle_seed,
        audit=audit,
    )
    report = run_session(ds, config, oracle, rng_seed=args.seed)
    outputs = export_session_outputs(report, out)
    summary = {
        "total": report.total,
        "model_labelled": report.model_labelled,
        "user_labelled": report.user_labelled,
        "model_label_ratio_percent": round(model_label_ratio(report), 2),
        "restarts": report.restarts,
        "iterations": len(report.records),
        "complete": report.complete,
    }
    outputs.append(out / "session_summary.json")
    with open(outputs[-1], "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(out, "label-session", _public_args(args), outputs)
    print(
        f"labelled {report.total} frames: model {report.model_labelled}, "
        f"user {report.user_labelled} "
        f"({model_label_ratio(report):.2f}% by model), restarts {report.restarts}"
    )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(dataset_dir=args.dataset_dir, checkpoint_dir=args.checkpoint_dir)
    if args.ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=args.ui_dir, html=True), name="ui")
    host, _, port = args.listen.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def cmd_report(args) -> int:
    from .reporting import export_session_outputs, model_label_ratio
    from .session import LabelSession

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(args.checkpoint) as fh:
        doc = json.load(fh)
    if "session" in doc:  # service checkpoint wraps the session document
        doc = doc["session"]
    session = LabelSession.from_checkpoint(doc)
    report = session.report()
    outputs = export_session_outputs(report, out)
    _write_manifest(out, "report", _public_args(args), outputs)
    ratio = model_label_ratio(report) if report.total else 0.0
    print(
        f"session at iteration {session.iteration}: model {report.model_labelled}, "
        f"user {report.user_labelled} ({ratio:.2f}% by model), "
        f"{'complete' if report.complete else 'in progress'}"
    )
    return 0


def _public_args(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _add_dataset_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--snr", type=parse_snr_range, default=parse_snr_range("0:2:18"),
                   help="SNR sweep as start:step:end (inclusive) or one value [default 0:2:18]")
    p.add_argument("--frames", type=int, default=100,
                   help="frames per couplet per SNR [default 100]")
    p.add_argument("--frame-len", type=int, default=1024,
                   help="complex samples per frame [default 1024]")
    p.add_argument("--seed", type=int, default=0, help="master seed [default 0]")
    p.add_argument("--total", type=int, default=None,
                   help="truncate the shuffled dataset to exactly this many frames")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rflabel",
        description="Active-learning labelling workbench for synthetic I/Q captures.",
    )
    parser.add_argument("--version", action="version", version=f"rflabel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a labelled I/Q dataset file")
    _add_dataset_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--features", action="store_true",
                   help="also export the per-frame feature matrix CSV")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("eval-classifiers",
                       help="accuracy-vs-SNR table and model size comparison")
    _add_dataset_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dataset", default=None,
                   help="evaluate an existing .iqds file instead of generating")
    p.add_argument("--split-seed", type=int, default=0,
                   help="seed of the stratified 70/30 split [default 0]")
    p.set_defaults(func=cmd_eval_classifiers)

    p = sub.add_parser("label-session",
                       help="run the labelling loop against the simulated oracle")
    _add_dataset_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dataset", default=None,
                   help="label an existing .iqds file instead of generating")
    p.add_argument("--page-size", type=int, default=30)
    p.add_argument("--restart-threshold", type=int, default=15)
    p.add_argument("--buffer-capacity", type=int, default=60)
    p.add_argument("--bootstrap", type=int, default=30)
    p.add_argument("--policy", choices=("margin", "entropy", "random"), default="margin")
    p.add_argument("--scorer", choices=("logistic", "svm"), default="logistic")
    p.add_argument("--max-iterations", type=int, default=1000)
    p.add_argument("--error-rate", type=float, default=0.0,
                   help="simulated oracle flip probability [default 0]")
    p.add_argument("--oracle-seed", type=int, default=0)
    p.add_argument("--audit-log", default=None,
                   help="append oracle responses to this JSON-lines file")
    p.set_defaults(func=cmd_label_session)

    p = sub.add_parser("serve", help="run the interactive labelling HTTP service")
    p.add_argument("--listen", default=os.environ.get("RFLABEL_LISTEN", "127.0.0.1:8000"),
                   help="host:port to bind (env RFLABEL_LISTEN) [default 127.0.0.1:8000]")
    p.add_argument("--dataset-dir", default=os.environ.get("RFLABEL_DATASET_DIR", "."),
                   help="directory holding .iqds dataset files (env RFLABEL_DATASET_DIR)")
    p.add_argument("--checkpoint-dir",
                   default=os.environ.get("RFLABEL_CHECKPOINT_DIR", "./checkpoints"),
                   help="directory for session checkpoints (env RFLABEL_CHECKPOINT_DIR)")
    p.add_argument("--ui-dir", default=os.environ.get("RFLABEL_UI_DIR"),
                   help="serve this static directory at /ui (the browser frontend)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("report", help="re-render session CSVs/figures from a checkpoint")
    p.add_argument("--checkpoint", required=True, help="session checkpoint JSON file")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # runtime failure: diagnostic on stderr, exit 1
        print(f"rflabel: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
