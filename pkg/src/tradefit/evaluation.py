"""Time-split accuracy of the recommenders: precision and recall.

Lists are built from the training-year network only; the testing network
enters solely through the set of products each country newly exports by the
test year. A country's precision is hits / list length, its recall is
hits / new exports. The run-level precision averages over every evaluated
country; the run-level recall is reported under both conventions (excluding
countries with no new exports, and counting them as zero).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .diffusion import (
    DEFAULT_EPSILON,
    DEFAULT_LIST_LENGTH,
    DEFAULT_TAU,
    DEFAULT_THETA,
    RecommendationList,
    recommend_all,
)
from .errors import DataError
from .trade_graph import BipartiteSnapshot

DEFAULT_HORIZON = 5


def new_exports(
    train: BipartiteSnapshot, test: BipartiteSnapshot, country: str
) -> tuple[str, ...]:
    """Products linked to the country at the test year but not the train year.

    Dropped links are ignored; only additions count. The country must be
    present in both snapshots.
    """
    before = set(train.exported(country))
    after = test.exported(country)
    return tuple(p for p in after if p not in before)


@dataclass(frozen=True)
class CountryOutcome:
    new_count: int
    hits: int
    precision: float
    recall: float | None  # None when the country gained no products


@dataclass(eq=False)
class EvaluationRun:
    """Per-country and aggregate accuracy for one (train, test, algorithm)."""

    train_year: int
    test_year: int
    algorithm: str
    params: dict
    length: int
    per_country: dict[str, CountryOutcome]
    precision: float
    recall: float
    recall_including_empty: float
    excluded: tuple[str, ...]          # in train but gone by the test year
    no_new_exports: tuple[str, ...]    # evaluated but with zero additions


def precision_recall(
    train: BipartiteSnapshot,
    test: BipartiteSnapshot,
    recommendations: Mapping[str, RecommendationList],
    length: int = DEFAULT_LIST_LENGTH,
    algorithm: str = "",
    params: dict | None = None,
) -> EvaluationRun:
    """Score recommendation lists against realized new exports.

    ``recommendations`` must cover every country present in both snapshots
    and must have been built from the training snapshot alone. Countries
    present at the train year but absent from the test snapshot are excluded
    and reported.
    """
    if length < 1:
        raise DataError(f"list length must be >= 1, got {length}")
    evaluated = [c for c in train.countries if c in test.country_index]
    excluded = tuple(c for c in train.countries if c not in test.country_index)
    missing = [c for c in evaluated if c not in recommendations]
    if missing:
        raise DataError(f"recommendations missing for {len(missing)} countries, e.g. {missing[0]!r}")

    per_country: dict[str, CountryOutcome] = {}
    no_new: list[str] = []
    for country in evaluated:
        gained = set(new_exports(train, test, country))
        picks = recommendations[country].products[:length]
        hits = sum(1 for p in picks if p in gained)
        recall_i = hits / len(gained) if gained else None
        if not gained:
            no_new.append(country)
        per_country[country] = CountryOutcome(
            new_count=len(gained),
            hits=hits,
            precision=hits / length,
            recall=recall_i,
        )

    precisions = [o.precision for o in per_country.values()]
    recalls = [o.recall for o in per_country.values() if o.recall is not None]
    recalls_all = [o.recall if o.recall is not None else 0.0 for o in per_country.values()]
    return EvaluationRun(
        train_year=train.year,
        test_year=test.year,
        algorithm=algorithm,
        params=dict(params or {}),
        length=length,
        per_country=per_country,
        precision=sum(precisions) / len(precisions) if precisions else 0.0,
        recall=sum(recalls) / len(recalls) if recalls else 0.0,
        recall_including_empty=sum(recalls_all) / len(recalls_all) if recalls_all else 0.0,
        excluded=excluded,
        no_new_exports=tuple(no_new),
    )


@dataclass(frozen=True)
class SweepRow:
    algorithm: str
    theta: float
    tau: int
    train_year: int
    precision: float
    recall: float
    recall_including_empty: float


@dataclass(eq=False)
class SweepResult:
    """Accuracy rows for every available (train year, algorithm) pair."""

    rows: list[SweepRow]
    missing: tuple[str, ...]  # human-readable reasons for skipped pairs

    def averages(self) -> list[SweepRow]:
        """One mean row per algorithm over its evaluated train years."""
        out: list[SweepRow] = []
        for algorithm in sorted({r.algorithm for r in self.rows}):
            rows = [r for r in self.rows if r.algorithm == algorithm]
            out.append(SweepRow(
                algorithm=algorithm,
                theta=rows[0].theta,
                tau=rows[0].tau,
                train_year=-1,
                precision=sum(r.precision for r in rows) / len(rows),
                recall=sum(r.recall for r in rows) / len(rows),
                recall_including_empty=sum(r.recall_including_empty for r in rows) / len(rows),
            ))
        return out


def evaluate_year(
    snapshots: Mapping[int, BipartiteSnapshot],
    train_year: int,
    algorithm: str,
    horizon: int = DEFAULT_HORIZON,
    theta: float = DEFAULT_THETA,
    tau: int = DEFAULT_TAU,
    epsilon: float = DEFAULT_EPSILON,
    length: int = DEFAULT_LIST_LENGTH,
) -> EvaluationRun:
    """Build train-side recommendations and score them at train_year + horizon."""
    train = snapshots.get(train_year)
    test = snapshots.get(train_year + horizon)
    if train is None:
        raise DataError(f"no snapshot for train year {train_year}")
    if test is None:
        raise DataError(f"no snapshot for test year {train_year + horizon}")
    previous = None
    if algorithm in ("di", "tprobs"):
        previous = snapshots.get(train_year - tau)
        if previous is None:
            raise DataError(f"no snapshot for year {train_year - tau} (needed by {algorithm})")
    recommendations = recommend_all(
        algorithm, train, previous, theta=theta, tau=tau, epsilon=epsilon, length=length
    )
    run = precision_recall(train, test, recommendations, length, algorithm)
    run.params = {"theta": theta, "tau": tau, "epsilon": epsilon}
    return run


def sweep(
    snapshots: Mapping[int, BipartiteSnapshot],
    start_year: int,
    end_year: int,
    algorithms: tuple[str, ...],
    horizon: int = DEFAULT_HORIZON,
    theta: float = DEFAULT_THETA,
    tau: int = DEFAULT_TAU,
    epsilon: float = DEFAULT_EPSILON,
    length: int = DEFAULT_LIST_LENGTH,
) -> SweepResult:
    """Evaluate every algorithm for every train year in the inclusive range.

    Pairs with missing snapshots are skipped and reported; the sweep fails
    only if nothing at all can be evaluated.
    """
    rows: list[SweepRow] = []
    missing: list[str] = []
    for train_year in range(start_year, end_year + 1):
        for algorithm in algorithms:
            try:
                run = evaluate_year(
                    snapshots, train_year, algorithm,
                    horizon=horizon, theta=theta, tau=tau, epsilon=epsilon, length=length,
                )
            except DataError as exc:
                missing.append(f"{algorithm} T={train_year}: {exc}")
                continue
            rows.append(SweepRow(
                algorithm=algorithm,
                theta=theta,
                tau=tau,
                train_year=train_year,
                precision=run.precision,
                recall=run.recall,
                recall_including_empty=run.recall_including_empty,
            ))
    if not rows:
        raise DataError("sweep produced no results: " + "; ".join(missing[:3]))
    return SweepResult(rows=rows, missing=tuple(missing))
