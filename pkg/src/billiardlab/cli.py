"""Command-line driver: ``billiardlab <command> [--config FILE] [overrides]``.

Every command writes its data file(s) and a ``<command>_manifest.json`` into
the output directory. Exit codes: 0 success, 2 precondition failure,
3 resource budget exceeded (partial output written).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time
from typing import Dict, List, Optional

from . import __version__
from .config import SEEDED, ConfigError, load_config
from .experiments import (
    PreconditionError,
    RunResult,
    cmd_complexity,
    cmd_dev_orbit,
    cmd_exponent,
    cmd_good_interval,
    cmd_hitting,
    cmd_partition,
    cmd_pipeline,
)
from .geometry import GeometryError

log = logging.getLogger("billiardlab")

COMMANDS = {
    "complexity": cmd_complexity,
    "exponent": cmd_exponent,
    "partition": cmd_partition,
    "good-interval": cmd_good_interval,
    "hitting": cmd_hitting,
    "dev-orbit": cmd_dev_orbit,
    "pipeline": cmd_pipeline,
}


def _angle(text: str):
    return text if text == SEEDED else float(text)


def _mu_grid(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with ExperimentConfig fields")
    common.add_argument("--output-dir", dest="output_dir")
    common.add_argument("--shape", choices=["triangle", "rhombus"])
    common.add_argument("--angle", type=_angle, help=f"radians or '{SEEDED}'")
    common.add_argument("--seed", type=int)
    common.add_argument("--n-max", dest="n_max", type=int)
    common.add_argument("--n-min", dest="n_min", type=int)
    common.add_argument("--apex", type=int)
    common.add_argument("--oriented", action="store_const", const=True, default=None)
    common.add_argument("--mu-grid", dest="mu_grid", type=_mu_grid, help="comma-separated")
    common.add_argument("--alpha", type=_angle, help=f"rotation number in (0, 1) or '{SEEDED}'")
    common.add_argument("--n-alphas", dest="n_alphas", type=int)
    common.add_argument("--hitting-cap", dest="hitting_cap", type=int)
    common.add_argument("--gamma", type=float)
    common.add_argument("--c", type=float)
    common.add_argument("--C", dest="C", type=float)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--vertex-rel", dest="vertex_rel", type=float)
    common.add_argument("--line-rel", dest="line_rel", type=float)
    common.add_argument("--node-budget", dest="node_budget", type=int)
    common.add_argument("--pair", type=int, choices=[0, 1])
    common.add_argument("--beam-mu", dest="beam_mu", type=float)
    common.add_argument("--max-steps", dest="max_steps", type=int)
    common.add_argument("--drag-step", dest="drag_step", type=float)
    common.add_argument("--max-drags", dest="max_drags", type=int)
    common.add_argument("--drag-target", dest="drag_target", choices=["apex", "left", "right"])
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="billiardlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "exponent":
            sp.add_argument("--series", help="CSV with columns n,P_n to fit instead of enumerating")
    return p


def _read_series(path: str) -> Dict[int, float]:
    with open(path, newline="") as fh:
        rows = csv.DictReader(line for line in fh if not line.startswith("#"))
        return {int(r["n"]): float(r["P_n"]) for r in rows}


def _write(out_dir: str, res: RunResult) -> List[dict]:
    os.makedirs(out_dir, exist_ok=True)
    listed = []
    for name in sorted(res.files):
        data = res.files[name].encode()
        with open(os.path.join(out_dir, name), "wb") as fh:
            fh.write(data)
        listed.append({"file": name, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)})
    return listed


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    skip = {"command", "config", "series", "verbose"}
    overrides = {k: v for k, v in vars(args).items() if k not in skip}
    try:
        cfg = load_config(args.config, overrides)
    except (ConfigError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    t0 = time.perf_counter()
    try:
        if args.command == "exponent" and args.series:
            res = cmd_exponent(cfg, _read_series(args.series))
        else:
            res = COMMANDS[args.command](cfg)
    except (PreconditionError, GeometryError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    wall = time.perf_counter() - t0

    outputs = _write(cfg.output_dir, res)
    manifest = {
        "command": args.command,
        "version": __version__,
        "config": cfg.echo(),
        "wall_clock_seconds": wall,
        "outputs": outputs,
        "warnings": res.warnings,
        "exit_code": res.exit_code,
    }
    with open(os.path.join(cfg.output_dir, f"{args.command}_manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    for w in res.warnings:
        log.warning(w)
    return res.exit_code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
