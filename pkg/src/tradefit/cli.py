"""Batch CLI: ingest -> recommend / fitness / evaluate / simulate.

Configuration comes from flags, which override an optional key=value config
file, which overrides built-in defaults. The fully resolved configuration is
validated before any computation and echoed into every output artifact.

Exit codes: 0 ok, 2 configuration error, 3 data error, 4 non-convergence.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import counterfactual as cf
from . import diffusion, evaluation, fitness, trade_graph
from .errors import ConfigError, ConvergenceError, DataError
from .output import Provenance, VERSION, file_sha256, significant, write_jsonl, write_table

DEFAULTS = {
    "horizon": 5,
    "theta": 0.2,
    "tau": 1,
    "epsilon": 1e-6,
    "L": 20,
    "threshold": 1.0,
    "threads": 1,
    "seed": 0,
    "max_iter": 5000,
    "stability_window": 50,
    "mode": "fixed_L",
    "algo": "probs,heats,di,tprobs,degree",
    "out": "out",
    "sample_tier": "middle",
}

_CONFIG_TYPES = {
    "input": str, "cache": str, "out": str, "years": str, "year": int,
    "horizon": int, "algo": str, "theta": float, "tau": int, "epsilon": float,
    "L": int, "threshold": float, "threads": int, "seed": int,
    "max_iter": int, "stability_window": int, "mode": str,
    "countries": str, "sample_size": int, "sample_tier": str,
}


def _read_config_file(path: str) -> dict:
    source = Path(path)
    if not source.exists():
        raise ConfigError(f"config file not found: {source}")
    values: dict = {}
    for lineno, raw in enumerate(source.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}: line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_TYPES:
            raise ConfigError(f"{source}: line {lineno}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_TYPES[key](value.strip())
        except ValueError:
            raise ConfigError(f"{source}: line {lineno}: bad value for {key!r}") from None
    return values


def _resolve(args: argparse.Namespace, keys: tuple[str, ...]) -> dict:
    """flag > config file > default, for each requested key."""
    from_file = _read_config_file(args.config) if getattr(args, "config", None) else {}
    resolved = {}
    for key in keys:
        value = getattr(args, key, None)
        if value is None:
            value = from_file.get(key)
        if value is None:
            value = DEFAULTS.get(key)
        resolved[key] = value
    return resolved


def _parse_year_range(text: str) -> tuple[int, int]:
    try:
        start, _, end = text.partition(":")
        lo, hi = int(start), int(end if end else start)
    except ValueError:
        raise ConfigError(f"expected a year range A:B, got {text!r}") from None
    if lo > hi:
        raise ConfigError(f"year range starts after it ends: {text!r}")
    return lo, hi


def _parse_algorithms(text: str) -> tuple[str, ...]:
    algos = tuple(a.strip() for a in text.split(",") if a.strip())
    if not algos:
        raise ConfigError("no algorithms given")
    for algo in algos:
        if algo not in diffusion.ALGORITHMS:
            raise ConfigError(
                f"unknown algorithm {algo!r}; expected any of {','.join(diffusion.ALGORITHMS)}"
            )
    return algos


@dataclass
class RunConfig:
    """Fully resolved, validated parameters for one CLI invocation."""

    command: str
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def as_dict(self) -> dict:
        return {"command": self.command, **self.values}

    def validate(self) -> "RunConfig":
        v = self.values
        checks = [
            ("horizon", lambda x: x >= 1, "horizon must be >= 1"),
            ("tau", lambda x: x >= 1, "tau must be >= 1"),
            ("epsilon", lambda x: x > 0 and math.isfinite(x), "epsilon must be positive and finite"),
            ("theta", lambda x: math.isfinite(x), "theta must be finite"),
            ("L", lambda x: x >= 0, "L must be >= 0"),
            ("threads", lambda x: x >= 1, "threads must be >= 1"),
            ("max_iter", lambda x: x >= 1, "max_iter must be >= 1"),
            ("stability_window", lambda x: x >= 1, "stability_window must be >= 1"),
            ("threshold", lambda x: x > 0, "threshold must be positive"),
        ]
        for key, ok, message in checks:
            if key in v and v[key] is not None and not ok(v[key]):
                raise ConfigError(f"{message} (got {v[key]})")
        if v.get("mode") is not None and v["mode"] not in ("fixed_L", "virtual", "virtual_network"):
            raise ConfigError(f"mode must be fixed_L or virtual, got {v['mode']!r}")
        if v.get("sample_tier") is not None and v["sample_tier"] not in ("top", "middle", "low", "all"):
            raise ConfigError(f"sample_tier must be top/middle/low/all, got {v['sample_tier']!r}")
        return self


def _load_cache(cache: str, years: set[int]) -> tuple[dict[int, trade_graph.BipartiteSnapshot], dict]:
    manifest = trade_graph.read_manifest(cache)
    available = set(manifest.get("years", []))
    snapshots = {
        year: trade_graph.load_cached_snapshot(cache, year)
        for year in sorted(years & available)
    }
    return snapshots, manifest


def _require_year(snapshots: dict, year: int, cache: str) -> trade_graph.BipartiteSnapshot:
    if year not in snapshots:
        raise DataError(f"no cached snapshot for year {year} in {cache}")
    return snapshots[year]


# --- commands ---------------------------------------------------------------

def cmd_ingest(args) -> int:
    config = RunConfig("ingest", _resolve(
        args, ("input", "years", "threshold", "out"))).validate()
    if not config["input"]:
        raise ConfigError("ingest requires --input")
    if not config["years"]:
        raise ConfigError("ingest requires --years A:B")
    year_range = _parse_year_range(config["years"])

    table = trade_graph.load_exports(config["input"], year_range)
    snapshots = trade_graph.build_snapshots(table, config["threshold"])
    input_hash = file_sha256(config["input"])
    trade_graph.write_cache(config["out"], snapshots, {
        "version": VERSION,
        "input_hash": input_hash,
        "year_range": list(year_range),
        "threshold": config["threshold"],
        "config": config.as_dict(),
    })

    for year in sorted(snapshots):
        raw = len(table.countries_in(year))
        kept = len(snapshots[year].countries)
        print(f"{year}: {raw} countries raw, {kept} retained, "
              f"{len(snapshots[year].products)} products, "
              f"{snapshots[year].link_count} links")
    missing = sorted(set(range(year_range[0], year_range[1] + 1)) - set(snapshots))
    if missing:
        print(f"warning: no records for years {missing}", file=sys.stderr)
    print(f"cached {len(snapshots)} snapshots in {config['out']}")
    return 0


def cmd_recommend(args) -> int:
    config = RunConfig("recommend", _resolve(
        args, ("cache", "year", "algo", "theta", "tau", "epsilon", "L", "out"))).validate()
    if not config["cache"] or config["year"] is None:
        raise ConfigError("recommend requires --cache and --year")
    if config["L"] < 1:
        raise ConfigError("recommend requires L >= 1")
    algorithms = _parse_algorithms(config["algo"])
    year, tau = config["year"], config["tau"]

    needed = {year} | ({year - tau} if set(algorithms) & {"di", "tprobs"} else set())
    snapshots, manifest = _load_cache(config["cache"], needed)
    snapshot = _require_year(snapshots, year, config["cache"])
    provenance = Provenance(config.as_dict(), manifest["input_hash"])

    out_dir = Path(config["out"])
    for algorithm in algorithms:
        previous = None
        if algorithm in ("di", "tprobs"):
            previous = _require_year(snapshots, year - tau, config["cache"])
        recommendations = diffusion.recommend_all(
            algorithm, snapshot, previous,
            theta=config["theta"], tau=tau, epsilon=config["epsilon"], length=config["L"],
        )
        records = [
            {
                "country": country,
                "algorithm": algorithm,
                "params": recs.params,
                "ranked_products": [[p, significant(s)] for p, s in recs.ranked_products],
                "padded": recs.padded,
                "truncated": recs.truncated,
            }
            for country, recs in recommendations.items()
        ]
        path = out_dir / f"recommendations_{algorithm}_{year}.jsonl"
        write_jsonl(path, records, provenance)
        print(f"wrote {path}")
    return 0


def cmd_fitness(args) -> int:
    config = RunConfig("fitness", _resolve(
        args, ("cache", "year", "max_iter", "stability_window", "out"))).validate()
    if not config["cache"] or config["year"] is None:
        raise ConfigError("fitness requires --cache and --year")
    year = config["year"]
    snapshots, manifest = _load_cache(config["cache"], {year})
    snapshot = _require_year(snapshots, year, config["cache"])
    provenance = Provenance(config.as_dict(), manifest["input_hash"])

    result = fitness.solve_fitness(snapshot, config["max_iter"], config["stability_window"])
    out_dir = Path(config["out"])
    write_table(
        out_dir / f"fitness_{year}.csv",
        ("year", "country", "fitness", "rank"),
        [(year, c, float(result.fitness[i]), int(result.ranks[i]))
         for i, c in enumerate(result.countries)],
        provenance,
    )
    write_table(
        out_dir / f"complexity_{year}.csv",
        ("year", "product", "complexity"),
        [(year, p, float(result.complexity[j]))
         for j, p in enumerate(result.products)
         if np.isfinite(result.complexity[j])],
        provenance,
    )
    print(f"year {year}: {result.iterations} iterations, converged={result.converged}")
    if not result.converged:
        print(f"error: fitness ranking did not stabilize within "
              f"{config['max_iter']} iterations", file=sys.stderr)
        return 4
    return 0


def cmd_evaluate(args) -> int:
    config = RunConfig("evaluate", _resolve(
        args, ("cache", "years", "horizon", "algo", "theta", "tau", "epsilon", "L", "out"))).validate()
    if not config["cache"] or not config["years"]:
        raise ConfigError("evaluate requires --cache and --years A:B (train years)")
    if config["L"] < 1:
        raise ConfigError("evaluate requires L >= 1")
    start, end = _parse_year_range(config["years"])
    algorithms = _parse_algorithms(config["algo"])
    horizon, tau = config["horizon"], config["tau"]

    needed = set(range(start - tau, end + horizon + 1))
    snapshots, manifest = _load_cache(config["cache"], needed)
    provenance = Provenance(config.as_dict(), manifest["input_hash"])

    result = evaluation.sweep(
        snapshots, start, end, algorithms,
        horizon=horizon, theta=config["theta"], tau=tau,
        epsilon=config["epsilon"], length=config["L"],
    )
    for reason in result.missing:
        print(f"skipped: {reason}", file=sys.stderr)

    rows = [
        (r.algorithm, r.theta, r.tau, r.train_year, r.precision, r.recall,
         r.recall_including_empty)
        for r in result.rows
    ]
    rows.extend(
        (r.algorithm, r.theta, r.tau, "mean", r.precision, r.recall,
         r.recall_including_empty)
        for r in result.averages()
    )
    path = Path(config["out"]) / "evaluation.csv"
    write_table(
        path,
        ("algorithm", "theta", "tau", "T", "precision", "recall", "recall_including_empty"),
        rows,
        provenance,
    )
    print(f"wrote {path} ({len(result.rows)} rows)")
    return 0


def _pick_countries(config, base_result) -> list[str] | None:
    """Explicit --countries wins; else optional seeded tier sampling."""
    if config["countries"]:
        return [c.strip() for c in config["countries"].split(",") if c.strip()]
    if config["sample_size"] is None:
        return None
    tiers = fitness.assign_tiers(base_result)
    pool = (sorted(tiers.tiers) if config["sample_tier"] == "all"
            else list(tiers.members(config["sample_tier"])))
    if config["sample_size"] >= len(pool):
        return pool
    rng = np.random.default_rng(config["seed"])
    picked = rng.choice(len(pool), size=config["sample_size"], replace=False)
    return [pool[i] for i in sorted(picked)]


def cmd_simulate(args) -> int:
    config = RunConfig("simulate", _resolve(args, (
        "cache", "mode", "year", "horizon", "algo", "theta", "tau", "epsilon",
        "L", "max_iter", "stability_window", "threads", "seed",
        "countries", "sample_size", "sample_tier", "out"))).validate()
    if not config["cache"] or config["year"] is None:
        raise ConfigError("simulate requires --cache and --year (train year)")
    algorithms = _parse_algorithms(config["algo"])
    year, tau, horizon = config["year"], config["tau"], config["horizon"]
    mode = "virtual_network" if config["mode"].startswith("virtual") else "fixed_L"

    needed = {year}
    if set(algorithms) & {"di", "tprobs"}:
        needed.add(year - tau)
    if mode == "virtual_network":
        needed.add(year + horizon)
    snapshots, manifest = _load_cache(config["cache"], needed)
    snapshot = _require_year(snapshots, year, config["cache"])
    previous = snapshots.get(year - tau)
    if set(algorithms) & {"di", "tprobs"} and previous is None:
        raise DataError(f"no cached snapshot for year {year - tau} (needed by di/tprobs)")
    provenance = Provenance(config.as_dict(), manifest["input_hash"])

    solver_opts = dict(max_iter=config["max_iter"],
                       rank_stability_window=config["stability_window"])
    if mode == "fixed_L":
        base = snapshot
    else:
        base = _require_year(snapshots, year + horizon, config["cache"])
    base_result = fitness.solve_fitness(base, **solver_opts)
    if not base_result.converged:
        raise ConvergenceError(f"base network of {base.year} did not converge")
    selected = _pick_countries(config, base_result)

    if mode == "fixed_L":
        report = cf.tier_report(
            snapshot, algorithms, config["L"], previous,
            theta=config["theta"], tau=tau, epsilon=config["epsilon"],
            countries=selected, threads=config["threads"],
            base_result=base_result, **solver_opts,
        )
    else:
        report = cf.virtual_report(
            snapshot, base, algorithms, previous,
            theta=config["theta"], tau=tau, epsilon=config["epsilon"],
            countries=selected, threads=config["threads"],
            base_result=base_result, **solver_opts,
        )

    out_dir = Path(config["out"])
    stem = f"counterfactual_{'virtual' if mode == 'virtual_network' else 'fixed_L'}_{year}"
    write_table(
        out_dir / f"{stem}.csv",
        ("mode", "algorithm", "L", "country", "tier", "fitness_base",
         "fitness_scenario", "delta_fitness", "rank_base", "rank_scenario", "delta_rank"),
        [(o.mode, o.algorithm, o.added, o.country, o.tier, o.fitness_base,
          o.fitness_scenario, o.delta_fitness, o.rank_base, o.rank_scenario,
          o.delta_rank) for o in report.outcomes],
        provenance,
    )
    write_table(
        out_dir / f"{stem}_tiers.csv",
        ("mode", "algorithm", "L", "tier", "count", "mean_delta_fitness", "mean_delta_rank"),
        [(report.mode, t.algorithm,
          report.length if report.length is not None else "dynamic",
          t.tier, t.count, t.mean_delta_fitness, t.mean_delta_rank)
         for t in report.tier_summary],
        provenance,
    )
    for reason in report.skipped:
        print(f"skipped: {reason}", file=sys.stderr)
    for algorithm, (up, total) in sorted(report.improved.items()):
        print(f"{algorithm}: {up}/{total} countries improved their fitness")
    print(f"wrote {out_dir / (stem + '.csv')}")
    return 0


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tradefit",
        description="Export-network recommendations, fitness ranking, and counterfactuals.",
    )
    parser.add_argument("--version", action="version", version=f"tradefit {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, cache: bool = True) -> None:
        p.add_argument("--config", help="optional key = value config file")
        p.add_argument("--out", help="output directory (default: out)")
        if cache:
            p.add_argument("--cache", help="snapshot cache directory from `ingest`")

    def algo_options(p: argparse.ArgumentParser) -> None:
        p.add_argument("--algo", "--algos", dest="algo",
                       help="comma-separated algorithms (probs,heats,di,tprobs,degree)")
        p.add_argument("--theta", type=float, help="growth exponent for tprobs (default 0.2)")
        p.add_argument("--tau", type=int, help="lookback window in years (default 1)")
        p.add_argument("--epsilon", type=float, help="degree tie-break weight (default 1e-6)")
        p.add_argument("--L", type=int, help="recommendation list length (default 20)")

    p = sub.add_parser("ingest", help="build and cache yearly snapshots from a CSV")
    common(p, cache=False)
    p.add_argument("--input", help="CSV with header year,country,product,value")
    p.add_argument("--years", help="inclusive year range A:B")
    p.add_argument("--threshold", type=float, help="advantage-ratio cutoff (default 1.0)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("recommend", help="write per-country recommendation lists")
    common(p)
    p.add_argument("--year", type=int, help="snapshot year to recommend from")
    algo_options(p)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("fitness", help="solve the fitness/complexity fixed point")
    common(p)
    p.add_argument("--year", type=int, help="snapshot year to solve")
    p.add_argument("--max-iter", dest="max_iter", type=int, help="iteration cap (default 5000)")
    p.add_argument("--stability-window", dest="stability_window", type=int,
                   help="consecutive stable-rank iterations to stop (default 50)")
    p.set_defaults(func=cmd_fitness)

    p = sub.add_parser("evaluate", help="precision/recall sweep over train years")
    common(p)
    p.add_argument("--years", "--T", dest="years", help="train-year range A:B")
    p.add_argument("--horizon", type=int, help="test at train year + horizon (default 5)")
    algo_options(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("simulate", help="counterfactual basket additions")
    common(p)
    p.add_argument("--mode", choices=("fixed_L", "virtual", "virtual_network"),
                   help="fixed_L (default) or virtual")
    p.add_argument("--year", type=int, help="base (train) year")
    p.add_argument("--horizon", type=int, help="virtual mode: test at year + horizon")
    algo_options(p)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--stability-window", dest="stability_window", type=int)
    p.add_argument("--threads", type=int, help="parallel scenario solves (default 1)")
    p.add_argument("--seed", type=int, help="seed for --sample-size (default 0)")
    p.add_argument("--countries", help="comma-separated focal-country override")
    p.add_argument("--sample-size", dest="sample_size", type=int,
                   help="simulate a seeded random subset of countries")
    p.add_argument("--sample-tier", dest="sample_tier",
                   choices=("top", "middle", "low", "all"),
                   help="tier to sample from (default middle)")
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
