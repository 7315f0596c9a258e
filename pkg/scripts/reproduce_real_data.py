#!/usr/bin/env python3
"""Full real-data study on a 2001-2015 export table.

Produces, in order:
  1. per-year network dimensions (raw vs retained country counts),
  2. the accuracy sweep averaged over train years 2001-2010,
  3. fixed-length tier deltas averaged over base years 2008-2015,
  4. virtual-network improvement counts per algorithm, aggregated over
     train years (per-country mean fitness delta across years).

Steps 3 and 4 solve one fixed point per (algorithm, country, year) and take
the longest; restrict --tier-years / --virtual-years to taste.
"""

import argparse
import sys
import time
from collections import defaultdict
from pathlib import Path

from tradefit import build_snapshots, load_exports, sweep
from tradefit.counterfactual import tier_report, virtual_report


def year_range(text: str) -> tuple[int, int]:
    start, _, end = text.partition(":")
    return int(start), int(end or start)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--input", required=True, help="year,country,product,value CSV")
    parser.add_argument("--years", default="2001:2015")
    parser.add_argument("--sweep-years", default="2001:2010")
    parser.add_argument("--tier-years", default="2008:2015")
    parser.add_argument("--virtual-years", default="2001:2010")
    parser.add_argument("--horizon", type=int, default=5)
    parser.add_argument("--theta", type=float, default=0.2)
    parser.add_argument("--length", type=int, default=20)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--algos", default="heats,tprobs")
    parser.add_argument("--out", default="real_out")
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    algorithms = tuple(args.algos.split(","))

    print("== loading ==")
    table = load_exports(args.input, year_range(args.years))
    snapshots = build_snapshots(table)
    for year in sorted(snapshots):
        snap = snapshots[year]
        print(f"{year}: {len(table.countries_in(year))} raw countries, "
              f"{len(snap.countries)} retained, {len(snap.products)} products")

    print("\n== accuracy sweep ==")
    start = time.perf_counter()
    result = sweep(snapshots, *year_range(args.sweep_years),
                   ("probs", "heats", "di", "tprobs", "degree"),
                   horizon=args.horizon, theta=args.theta, length=args.length)
    print(f"({time.perf_counter() - start:.1f}s)")
    for row in sorted(result.averages(), key=lambda r: -r.recall):
        print(f"  {row.algorithm:7s} precision={row.precision:.4f} recall={row.recall:.4f}")

    print("\n== fixed-length tier deltas ==")
    sums = defaultdict(lambda: [0.0, 0.0, 0])  # (algo, tier) -> [dF, drank, n]
    lo, hi = year_range(args.tier_years)
    for year in range(lo, hi + 1):
        if year not in snapshots:
            continue
        report = tier_report(snapshots[year], algorithms, args.length,
                             previous=snapshots.get(year - 1), theta=args.theta,
                             threads=args.threads)
        for aggregate in report.tier_summary:
            cell = sums[(aggregate.algorithm, aggregate.tier)]
            cell[0] += aggregate.mean_delta_fitness * aggregate.count
            cell[1] += aggregate.mean_delta_rank * aggregate.count
            cell[2] += aggregate.count
        print(f"  base year {year} done")
    for (algorithm, tier), (df, dr, n) in sorted(sums.items()):
        print(f"  {algorithm:7s} {tier:6s} mean dF={df / n:+.4f} mean drank={dr / n:+.2f}")

    print("\n== virtual-network improvement counts ==")
    lo, hi = year_range(args.virtual_years)
    per_country = {a: defaultdict(list) for a in algorithms}
    for year in range(lo, hi + 1):
        train, test = snapshots.get(year), snapshots.get(year + args.horizon)
        if train is None or test is None:
            continue
        report = virtual_report(train, test, algorithms,
                                previous=snapshots.get(year - 1),
                                theta=args.theta, threads=args.threads)
        for outcome in report.outcomes:
            per_country[outcome.algorithm][outcome.country].append(outcome.delta_fitness)
        print(f"  train year {year} done")
    for algorithm in algorithms:
        deltas = {c: sum(v) / len(v) for c, v in per_country[algorithm].items()}
        improved = sum(1 for v in deltas.values() if v > 0)
        print(f"  {algorithm}: {improved}/{len(deltas)} countries improve on average")
    return 0


if __name__ == "__main__":
    sys.exit(main())
