"""Command line: ``innerdyn run <config>`` and ``innerdyn list-presets``.

Exit status of ``run``: 0 when every configured assertion passes, 1 when one
fails, 2 for an invalid configuration, 3 when an interior orbit exhausts
double precision, 4 for other numerical refusals (budget, root finding).
"""

from __future__ import annotations

import argparse
import os
import platform
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .config import ConfigError, ExperimentConfig, load_config
from .errors import (
    BudgetExceeded,
    ConstructionError,
    DomainError,
    HorizonTooShort,
    PrecisionExhausted,
    RootFindingError,
)
from .presets import PRESETS, preset_table, schemas
from .report import write_csv, write_manifest

OUTPUT_ENV = "INNERDYN_OUTPUT_DIR"
DEFAULT_OUTPUT = "innerdyn-results"

EXIT_OK, EXIT_ASSERT, EXIT_CONFIG, EXIT_PRECISION, EXIT_NUMERIC = 0, 1, 2, 3, 4


def resolve_output_dir(cli_out: Optional[str], cfg: ExperimentConfig) -> Path:
    if cli_out:
        return Path(cli_out)
    if cfg.params.get("output_dir"):
        return Path(cfg.params["output_dir"])
    return Path(os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT) / cfg.preset


def execute(cfg: ExperimentConfig, out_dir: Path, log=print) -> int:
    """Run a validated configuration, write CSVs and the manifest."""
    preset = PRESETS[cfg.preset]
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    result = preset.runner(dict(cfg.params))
    elapsed = time.perf_counter() - t0
    out_dir.mkdir(parents=True, exist_ok=True)
    csvs = {}
    for table in result.tables:
        path, digest = write_csv(out_dir, table)
        csvs[path.name] = digest
    criteria = []
    for a in cfg.assertions:
        value = result.metrics.get(a.metric)
        ok = a.check(value)
        criteria.append({"key": a.key, "metric": a.metric, "op": a.op,
                         "threshold": a.threshold, "measured": value, "passed": ok})
        log(f"{'PASS' if ok else 'FAIL'} {a.metric} = {value!r} "
            f"({'>=' if a.op == 'min' else '<='} {a.threshold!r})")
    passed = all(c["passed"] for c in criteria)
    write_manifest(out_dir, {
        "config": cfg.echo(),
        "config_path": cfg.source,
        "version": __version__,
        "python": platform.python_version(),
        "started_utc": started.isoformat(timespec="seconds"),
        "wall_clock_seconds": elapsed,
        "metrics": result.metrics,
        "info": result.info,
        "criteria": criteria,
        "csv_sha256": csvs,
        "passed": passed,
    })
    log(f"wrote {len(csvs)} CSV file(s) and manifest.json to {out_dir}")
    return EXIT_OK if passed else EXIT_ASSERT


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config, schemas())
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg.params["seed"] = args.seed
    if args.threads is not None:
        cfg.params["threads"] = args.threads
    out_dir = resolve_output_dir(args.out, cfg)
    try:
        return execute(cfg, out_dir)
    except PrecisionExhausted as exc:
        print(f"precision exhausted at step n={exc.n}: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (ConstructionError, DomainError, HorizonTooShort, ValueError) as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BudgetExceeded, RootFindingError) as exc:
        print(f"numerical refusal: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def cmd_list(args) -> int:
    sys.stdout.write(preset_table())
    return EXIT_OK


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="innerdyn",
        description="Experiments on forward compositions of finite Blaschke products.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment configuration")
    run.add_argument("config", help="path to a key = value configuration file")
    run.add_argument("--out", help=f"output directory (default: ${OUTPUT_ENV}/<preset>)")
    run.add_argument("--threads", type=_positive, help="worker threads; never changes results")
    run.add_argument("--seed", type=_u64, help="override the configured seed")
    run.set_defaults(func=cmd_run)
    lst = sub.add_parser("list-presets", help="print the preset table")
    lst.set_defaults(func=cmd_list)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
