#!/usr/bin/env python3
"""End-to-end shakedown on synthetic data: ingest, recommend, fitness,
evaluate, and both simulation modes, all through the CLI entry points."""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))
from make_synthetic_data import generate

from tradefit.cli import main as cli


def run(argv: list[str]) -> None:
    print(f"$ tradefit {' '.join(argv)}")
    code = cli(argv)
    if code != 0:
        raise SystemExit(f"step failed with exit code {code}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="demo")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    work = Path(args.workdir)
    csv = work / "trade.csv"
    cache = work / "cache"
    out = work / "out"
    records = generate(csv, 2000, 2015, 30, 60, args.seed)
    print(f"synthetic table: {records} records")

    run(["ingest", "--input", str(csv), "--years", "2000:2015", "--out", str(cache)])
    run(["recommend", "--cache", str(cache), "--year", "2008",
         "--algo", "probs,heats,di,tprobs,degree", "--out", str(out)])
    run(["fitness", "--cache", str(cache), "--year", "2008", "--out", str(out)])
    run(["evaluate", "--cache", str(cache), "--years", "2001:2010",
         "--algo", "probs,heats,di,tprobs,degree", "--out", str(out)])
    run(["simulate", "--cache", str(cache), "--mode", "fixed_L", "--year", "2008",
         "--algo", "heats,tprobs", "--L", "20", "--out", str(out)])
    run(["simulate", "--cache", str(cache), "--mode", "virtual", "--year", "2008",
         "--algo", "heats,tprobs", "--out", str(out)])

    print("\nartifacts:")
    for path in sorted(out.iterdir()):
        print(f"  {path}")


if __name__ == "__main__":
    main()
