"""Command-line entry point orchestrating the audit pipeline.

Subcommands mirror the pipeline stages: synth, features, train, audit,
characterize, report, serve. All randomness flows from --seed; the
UU_AUDIT_THREADS environment variable caps internal worker counts.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import pipeline, synth
from .grouping import DEFAULT_DELTA
from .util import THREADS_ENV


def _add_out(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", required=True, help="artifact directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uu-audit",
        description="Audit binary student-success predictors for unknown unknowns.",
        epilog=f"Set {THREADS_ENV} to cap worker threads (default 1).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic course")
    p.add_argument("--preset", default="flipped", help="flipped | mooc | path to a config JSON")
    p.add_argument("--seed", type=int, default=None)
    _add_out(p)

    p = sub.add_parser("features", help="compute weekly indicators and averaged vectors")
    p.add_argument("--events", default=None)
    p.add_argument("--schedule", default=None)
    p.add_argument("--outcomes", default=None)
    p.add_argument("--demographics", default=None)
    _add_out(p)

    p = sub.add_parser("train", help="nested cross-validated training")
    p.add_argument("--model", choices=("forest", "overconfident", "import"), default="forest")
    p.add_argument("--grid", choices=("default", "fast"), default="default")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--schedule", default=None)
    p.add_argument("--outcomes", default=None)
    _add_out(p)

    p = sub.add_parser("audit", help="group predictions at a trust level")
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--scores", default=None, help="external scores CSV (user_id,fold_id,p)")
    p.add_argument("--schedule", default=None)
    p.add_argument("--outcomes", default=None)
    _add_out(p)

    p = sub.add_parser("characterize", help="regress group membership on indicators")
    p.add_argument("--target", choices=("binary", "ordinal"), default="binary")
    _add_out(p)

    p = sub.add_parser("report", help="render SVG figures from the artifacts")
    _add_out(p)

    p = sub.add_parser("serve", help="serve the triage API (and dashboard bundle)")
    p.add_argument("--port", type=int, default=8008)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static", default=None, help="built dashboard directory")
    _add_out(p)

    return parser


def cmd_synth(args) -> int:
    if args.preset in ("flipped", "mooc"):
        cfg = synth.load_preset(args.preset)
    else:
        cfg = synth.from_dict(json.loads(Path(args.preset).read_text(encoding="utf-8")))
    paths = pipeline.stage_synth(cfg, args.out, seed=args.seed)
    print(json.dumps(paths, indent=2, sort_keys=True))
    return 0


def cmd_features(args) -> int:
    pipeline.stage_features(
        args.out,
        events_path=args.events,
        schedule_path=args.schedule,
        outcomes_path=args.outcomes,
        demographics_path=args.demographics,
    )
    print(f"features written to {args.out}")
    return 0


def cmd_train(args) -> int:
    if args.model == "import":
        print("imported scores need no training; run `uu-audit audit --scores ...`", file=sys.stderr)
        return 2
    report = pipeline.stage_train(
        args.out,
        model=args.model,
        seed=args.seed,
        grid=args.grid,
        outcomes_path=args.outcomes,
        schedule_path=args.schedule,
    )
    print(json.dumps({"model": report.model_id, "balanced_accuracy": report.summary()}, indent=2))
    return 0


def cmd_audit(args) -> int:
    summary = pipeline.stage_audit(
        args.out,
        delta=args.delta,
        scores_path=args.scores,
        outcomes_path=args.outcomes,
        schedule_path=args.schedule,
    )
    print(json.dumps(summary.to_dict(), indent=2, sort_keys=True))
    return 0


def cmd_characterize(args) -> int:
    fit = pipeline.stage_characterize(args.out, target_mode=args.target)
    print(json.dumps({"target_mode": fit.target_mode, "r2": fit.r2, "f_p": fit.f_p}, indent=2))
    return 0


def cmd_report(args) -> int:
    written = pipeline.stage_report(args.out)
    for path in written:
        print(path)
    return 0


def cmd_serve(args) -> int:
    from .serve import run_server

    run_server(args.out, port=args.port, host=args.host, static_dir=args.static)
    return 0


_COMMANDS = {
    "synth": cmd_synth,
    "features": cmd_features,
    "train": cmd_train,
    "audit": cmd_audit,
    "characterize": cmd_characterize,
    "report": cmd_report,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
