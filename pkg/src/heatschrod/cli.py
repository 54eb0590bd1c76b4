"""Command line entry point: ``heatschrod <command> --config run.toml``.

Every command writes ``report.json`` (and ``table.csv`` when the command
produces rows) under ``--out`` and exits 0 only if every certificate passes.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load, validate
from .solve import run_gate_count, run_sweep, run_verify_circuits, solve

log = logging.getLogger("heatschrod")

COMMANDS = {
    "solve": solve,
    "verify-circuits": run_verify_circuits,
    "gate-count": run_gate_count,
    "sweep": run_sweep,
}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_csv(rows: list[dict], path: Path) -> None:
    cols = list(rows[0])
    for r in rows[1:]:
        cols += [k for k in r if k not in cols]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in cols})


def write_report(report: dict, out: Path, cfg: RunConfig) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    rows = report.pop("table", None)
    if rows:
        write_csv(rows, out / cfg.output.csv)
    path = out / cfg.output.report
    path.write_text(json.dumps(_jsonable(report), indent=2, sort_keys=False))
    return path


def summary_lines(report: dict) -> list[str]:
    lines = [f"{report['command']} ({report['method']})  wall {report['wall_time']:.2f} s"]
    for key, val in report["errors"].items():
        if val is not None:
            lines.append(f"  {key:<24} {val:.3e}")
    for c in report["certificates"]:
        mark = "PASS" if c["pass"] else "FAIL"
        lines.append(f"  [{mark}] {c['name']}: {c['lhs']:.3e} {c['relation']} {c['rhs']:.3e}")
    return lines


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="heatschrod", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="TOML run configuration")
        p.add_argument("--out", type=Path, help="output directory (default: output.dir)")
        p.add_argument("--threads", type=int, help="worker threads for sweep points")
        p.add_argument("--seed", type=int)
        p.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load(args.config) if args.config else RunConfig()
        if args.threads is not None:
            cfg.threads = args.threads
        if args.seed is not None:
            cfg.seed = args.seed
        validate(cfg)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        report = COMMANDS[args.command](cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report["command"] = args.command
    path = write_report(report, args.out or Path(cfg.output.dir), cfg)
    print("\n".join(summary_lines(report)))
    log.info("report written to %s", path)
    return 0 if all(c["pass"] for c in report["certificates"]) else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
