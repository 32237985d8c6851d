"""Command line entry point: ``ksdt run | sweep | modes``.

Exit codes: 0 success, 2 configuration error, 3 numeric-integrity failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import load_config
from .errors import ConfigError, NumericError
from .harness import execute, meta_for, mode_adaptation_experiment, sweep_configs
from .io import OutputError, write_snapshot, write_trace

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 1

log = logging.getLogger("ksdt")


def _run_cell(cfg, out_dir: Path) -> dict:
    result = execute(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trace(result.records, out_dir / "trace.csv", meta=meta_for(cfg))
    write_snapshot(result.state, out_dir / "dictionary.csv", step=cfg.steps)
    last = result.records[-1]
    return {
        "dir": str(out_dir),
        "steps": cfg.steps,
        "dict_size": last.dict_size,
        "ksd": last.ksd,
        "normalized_ksd": last.normalized_ksd,
    }


def _out_dir(args, cfg) -> Path:
    return Path(args.out or cfg.output or "ksdt-out")


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_(seed=args.seed)
    summary = _run_cell(cfg, _out_dir(args, cfg))
    print(json.dumps(summary))
    return 0


def _parse_param(spec: str):
    if "=" not in spec:
        raise ConfigError("param", "expected NAME=V1,V2,...")
    name, values = spec.split("=", 1)
    values = [v for v in values.split(",") if v]
    if not values:
        raise ConfigError("param", "no values given")
    return name.strip(), values


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_(seed=args.seed)
    name, values = _parse_param(args.param)
    cells = sweep_configs(cfg, name, values)
    root = _out_dir(args, cfg)
    dirs = [root / label.replace("=", "_") for label, _ in cells]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            summaries = list(pool.map(_run_cell, [c for _, c in cells], dirs))
    else:
        summaries = [_run_cell(c, d) for (_, c), d in zip(cells, dirs)]
    index = [{"label": label, **s} for (label, _), s in zip(cells, summaries)]
    (root / "sweep_index.json").write_text(json.dumps({"param": name, "cells": index}, indent=2) + "\n")
    for row in index:
        print(json.dumps(row))
    return 0


def cmd_modes(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_(seed=args.seed)
    try:
        modes = [int(v) for v in args.modes.split(",") if v]
    except ValueError:
        raise ConfigError("modes", f"expected comma-separated integers, got {args.modes!r}") from None
    results = mode_adaptation_experiment(modes, cfg, repeats=args.repeats)
    root = _out_dir(args, cfg)
    root.mkdir(parents=True, exist_ok=True)
    with (root / "modes.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["modes", "repeat", "retained"])
        for res in results:
            for r, count in enumerate(res.retained):
                writer.writerow([res.modes, r, count])
    for res in results:
        print(json.dumps({"modes": res.modes, "retained": res.retained, "mean": res.mean_retained}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ksdt", description="Online KSD thinning experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a one-parameter sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--param", required=True, help="e.g. alpha=1.2,1.5,1.8,2.0")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("modes", help="retained dictionary size versus mixture mode count")
    p.add_argument("--config", required=True)
    p.add_argument("--modes", required=True, help="e.g. 1,2,4,10")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_modes)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric integrity failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
