"""Run verification suites for a scenario file and print a one-line summary per check."""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
from pathlib import Path

from proca_lab import bundled_scenario
from proca_lab.cli import main as cli_main


def parse_args() -> argparse.Namespace:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--scenario", default=str(bundled_scenario("flat_1p1_small.json")))
    p.add_argument("--suite", default="full")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="keep the JSON report here")
    return p.parse_args()


def main() -> int:
    args = parse_args()
    out = args.out or str(Path(tempfile.mkdtemp()) / "report.json")
    argv = ["run", "--scenario", args.scenario, "--suite", args.suite, "--out", out]
    if args.seed is not None:
        argv += ["--seed", str(args.seed)]
    code = cli_main(argv)
    if code == 2:
        return code
    report = json.loads(Path(out).read_text())
    for c in report["checks"]:
        flag = "ok  " if c["pass"] else "FAIL"
        print(f"{flag} {c['check_id']:<42} {c['residual']:>14} <= {c['threshold']}")
    print(f"all_pass={report['all_pass']}  report={out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
