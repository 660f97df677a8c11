#!/usr/bin/env python3
"""Run every shipped experiment config through the command-line front end.

Each entry pairs a subcommand with a config file from scripts/configs/;
reports land in the output directory as <config-stem>.json/.csv.  The
script exits nonzero if any experiment fails its asserted verdicts, and
prints one status line per experiment.

Run:  python3 scripts/run_all.py [--out-dir results] [--only SUBSTRING]
"""

from __future__ import annotations

import argparse
import time
from pathlib import Path

from doublesine.cli import main as cli_main

CONFIG_DIR = Path(__file__).resolve().parent / "configs"

MANIFEST: tuple[tuple[str, str], ...] = (
    ("check-class", "membership-osc-r2.cfg"),
    ("check-class", "membership-osc-r1.cfg"),
    ("check-class", "membership-mod3-r3.cfg"),
    ("condition-22", "condition22-osc.cfg"),
    ("condition-22", "condition22-pp11.cfg"),
    ("partial-sum", "partial-sum-osc.cfg"),
    ("uniform-tail", "uniform-tail-osc.cfg"),
    ("uniform-tail", "uniform-tail-mod3.cfg"),
    ("lemma", "lemma1-osc.cfg"),
    ("lemma", "lemma2-osc.cfg"),
    ("lemma", "lemma3-osc.cfg"),
    ("eta", "eta-osc-eps02.cfg"),
    ("eta", "eta-osc-eps005.cfg"),
    ("remark2", "remark2.cfg"),
    ("verify-identities", "verify-identities.cfg"),
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="results",
                        help="directory for the JSON/CSV reports")
    parser.add_argument("--only", help="run only configs whose name contains this")
    args = parser.parse_args(argv)

    failures = []
    for command, name in MANIFEST:
        if args.only and args.only not in name:
            continue
        stem = name.removesuffix(".cfg")
        started = time.perf_counter()
        code = cli_main([command, "--config", str(CONFIG_DIR / name),
                         "--out-dir", args.out_dir,
                         "--json", f"{stem}.json", "--csv", f"{stem}.csv"])
        elapsed = time.perf_counter() - started
        status = "ok" if code == 0 else f"EXIT {code}"
        print(f"{name:28s} {status:8s} {elapsed:6.2f}s")
        if code != 0:
            failures.append(name)

    if failures:
        print(f"{len(failures)} experiment(s) failed: {', '.join(failures)}")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
