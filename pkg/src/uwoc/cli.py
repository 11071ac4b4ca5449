"""Command-line entry point: ``uwoc sweep|validate|oracle``."""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
import time
from importlib import metadata
from pathlib import Path

from . import config as cfgmod
from .montecarlo import worker_count
from .specfun import SpecfunError, load_golden, meijer_g_eval
from .sweeps import run_figure

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0.0.0+local"


def _report_config_error(exc: cfgmod.ConfigError) -> int:
    for path, msg in exc.problems:
        print(f"config error: {path or '<root>'}: {msg}", file=sys.stderr)
    return EXIT_CONFIG


def _load(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise cfgmod.ConfigError([("", f"file not found: {path}")])
    return cfgmod.load(p)


def cmd_validate(args) -> int:
    try:
        cfg = _load(args.config)
    except cfgmod.ConfigError as exc:
        return _report_config_error(exc)
    json.dump(cfg, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        cfg = _load(args.config)
        if args.seed is not None:
            cfg = cfgmod.normalize({**cfg, "seed": args.seed})
    except cfgmod.ConfigError as exc:
        return _report_config_error(exc)
    threads = worker_count(args.threads)
    out = Path(args.out) if args.out else Path(f"{cfg['sweep']['figure']}.csv")
    t0 = time.perf_counter()
    try:
        table = run_figure(cfg, threads)
    except (ArithmeticError, SpecfunError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: sweep: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = table.to_csv()
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    manifest = {
        "figure": cfg["sweep"]["figure"],
        "config_hash": cfgmod.config_hash(cfg),
        "seed": cfg["seed"],
        "tool_version": _version(),
        "wall_time_s": time.perf_counter() - t0,
        "threads": threads,
        "rows": len(table.rows),
        "csv": str(out),
        "csv_sha256": hashlib.sha256(text.encode()).hexdigest(),
        "errors": table.errors,
    }
    out.with_suffix(".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    if table.errors:
        print(f"{len(table.errors)} point(s) failed; see manifest", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_oracle(args) -> int:
    records = load_golden(args.corpus)
    failed = 0
    t0 = time.perf_counter()
    for rec in records:
        try:
            got = meijer_g_eval(rec.order, rec.z)
            rel = abs(got.value - rec.value) / abs(rec.value) if rec.value else abs(got.value)
            ok = rel <= rec.tol
        except SpecfunError as exc:
            rel, ok = math.inf, False
            print(f"{rec.label}: {exc}", file=sys.stderr)
        failed += not ok
        print(f"{'ok  ' if ok else 'FAIL'} {rec.label:<16} z={rec.z!r:<12} rel={rel:.2e}")
    print(f"{len(records) - failed}/{len(records)} passed in {time.perf_counter() - t0:.2f} s")
    return EXIT_OK if failed == 0 else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uwoc", description="UWOC / O-RIS performance sweeps")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    s = sub.add_parser("sweep", help="run a figure sweep and write CSV + manifest")
    s.add_argument("config")
    s.add_argument("--seed", type=int)
    s.add_argument("--threads", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)
    v = sub.add_parser("validate", help="print the normalized configuration")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)
    o = sub.add_parser("oracle", help="check the Meijer-G golden corpus")
    o.add_argument("corpus", nargs="?")
    o.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
