#!/usr/bin/env python3
"""Generate a synthetic export table for demos and pipeline shakedowns.

Baskets drift over time: values random-walk multiplicatively and countries
occasionally switch on new products, so train/test splits have real signal.
"""

import argparse
from pathlib import Path

import numpy as np


def generate(path: Path, first_year: int, last_year: int,
             n_countries: int, n_products: int, seed: int) -> int:
    rng = np.random.default_rng(seed)
    countries = [f"C{i:02d}" for i in range(n_countries)]
    products = [f"P{j:02d}" for j in range(n_products)]
    rows = ["year,country,product,value"]
    base = rng.gamma(2.0, 2.0, size=(n_countries, n_products))
    active = rng.random((n_countries, n_products)) < 0.6
    for year in range(first_year, last_year + 1):
        base = base * rng.lognormal(0.0, 0.25, size=base.shape)
        active = active | (rng.random(active.shape) < 0.07)
        for i, country in enumerate(countries):
            for j, product in enumerate(products):
                if active[i, j]:
                    rows.append(f"{year},{country},{product},{base[i, j]:.4f}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return len(rows) - 1


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo/trade.csv")
    parser.add_argument("--first-year", type=int, default=2000)
    parser.add_argument("--last-year", type=int, default=2015)
    parser.add_argument("--countries", type=int, default=30)
    parser.add_argument("--products", type=int, default=60)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    count = generate(Path(args.out), args.first_year, args.last_year,
                     args.countries, args.products, args.seed)
    print(f"wrote {count} records to {args.out}")


if __name__ == "__main__":
    main()
