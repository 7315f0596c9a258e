"""What-if simulations: add recommended products to one country's basket and
re-solve the fitness fixed point.

Scenarios modify exactly one country at a time; every other adjacency row is
bit-identical to the reference network. Two modes exist:

* fixed length: the country's top-L recommendations are added to its current
  network, and the change in its fitness and rank is measured against the
  unmodified network.
* virtual network: starting from the real later-year network, the focal
  country's actually-gained links are swapped for its top recommendations
  from the earlier year, with the list length set to the number of real
  gains. Total link count is preserved, and deltas are measured against the
  real later-year network.

Base and scenario networks are always solved with identical solver settings
so deltas are insensitive to normalization or stopping choices.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable

from .diffusion import (
    DEFAULT_EPSILON,
    DEFAULT_LIST_LENGTH,
    DEFAULT_TAU,
    DEFAULT_THETA,
    RecommendationList,
    recommend_all,
    score_matrix,
    top_l,
)
from .errors import ConvergenceError, DataError, ScenarioSkipped
from .evaluation import new_exports
from .fitness import (
    DEFAULT_MAX_ITER,
    DEFAULT_STABILITY_WINDOW,
    FitnessResult,
    assign_tiers,
    solve_fitness,
)
from .trade_graph import BipartiteSnapshot

MODE_FIXED = "fixed_L"
MODE_VIRTUAL = "virtual_network"


@dataclass(eq=False)
class Scenario:
    """One modified network: the focal country gained ``added`` products.

    ``base`` is the unmodified reference network used for delta comparisons;
    in virtual mode it is the real later-year snapshot and ``replaced``
    lists the real new links that were swapped out.
    """

    mode: str
    country: str
    base: BipartiteSnapshot
    network: BipartiteSnapshot
    added: tuple[str, ...]
    replaced: tuple[str, ...] = ()


def apply_recommendations(
    snapshot: BipartiteSnapshot,
    country: str,
    recs: RecommendationList,
    length: int,
) -> Scenario:
    """Add the country's top-``length`` recommended products to its row.

    The recommendation list must have been built from this exact snapshot
    (fingerprints are compared) and must contain at least ``length`` items.
    ``length`` 0 yields a scenario identical to the snapshot.
    """
    if recs.snapshot_fingerprint != snapshot.fingerprint:
        raise DataError(
            f"recommendations for {country!r} were built from a different snapshot"
        )
    if recs.country != country:
        raise DataError(f"recommendation list belongs to {recs.country!r}, not {country!r}")
    if length < 0 or length > len(recs.ranked_products):
        raise DataError(
            f"cannot add {length} products from a list of {len(recs.ranked_products)}"
        )
    row = snapshot.country_row(country).copy()
    added = recs.products[:length]
    for product in added:
        j = snapshot.product_index[product]
        if row[j]:
            raise DataError(f"recommended product {product!r} is already exported")
        row[j] = 1
    network = snapshot.with_country_row(country, row) if length else snapshot
    return Scenario(MODE_FIXED, country, snapshot, network, added)


def virtual_network(
    train: BipartiteSnapshot,
    test: BipartiteSnapshot,
    country: str,
    recs: RecommendationList,
) -> Scenario:
    """Swap the country's real new links for its recommendations.

    The list length is the country's count of real gains between the two
    years, so the scenario network has exactly as many links as the real
    test network. Links the country lost stay lost. Raises ScenarioSkipped
    when the country gained nothing.
    """
    if country not in train.country_index or country not in test.country_index:
        raise DataError(f"country {country!r} must be present in both snapshots")
    if recs.snapshot_fingerprint != train.fingerprint:
        raise DataError(
            f"recommendations for {country!r} were not built from the train snapshot"
        )
    gained = new_exports(train, test, country)
    if not gained:
        raise ScenarioSkipped(f"{country!r} gained no products; nothing to replace")
    if len(recs.ranked_products) < len(gained):
        raise DataError(
            f"need {len(gained)} recommendations for {country!r}, have {len(recs.ranked_products)}"
        )
    row = test.country_row(country).copy()
    for product in gained:
        row[test.product_index[product]] = 0
    added = recs.products[: len(gained)]
    for product in added:
        j = test.product_index[product]
        if row[j]:
            raise DataError(f"recommended product {product!r} already linked in scenario")
        row[j] = 1
    network = test.with_country_row(country, row)
    return Scenario(MODE_VIRTUAL, country, test, network, added, replaced=gained)


@dataclass(frozen=True)
class ScenarioEvaluation:
    country: str
    fitness_base: float
    fitness_scenario: float
    delta_fitness: float
    rank_base: int
    rank_scenario: int
    delta_rank: int  # positive = the focal country moved up


def evaluate_scenario(
    scenario: Scenario,
    max_iter: int = DEFAULT_MAX_ITER,
    rank_stability_window: int = DEFAULT_STABILITY_WINDOW,
    base_result: FitnessResult | None = None,
) -> ScenarioEvaluation:
    """Solve base and scenario networks and report the focal country's deltas.

    ``base_result`` may carry a pre-solved base network (it must come from
    the same solver settings). Raises ConvergenceError if either solve fails
    to stabilize.
    """
    if base_result is None:
        base_result = solve_fitness(scenario.base, max_iter, rank_stability_window)
    if not base_result.converged:
        raise ConvergenceError(f"base network of {scenario.base.year} did not converge")
    scenario_result = solve_fitness(scenario.network, max_iter, rank_stability_window)
    if not scenario_result.converged:
        raise ConvergenceError(
            f"scenario network for {scenario.country!r} did not converge"
        )
    fitness_base = base_result.fitness_of(scenario.country)
    fitness_scenario = scenario_result.fitness_of(scenario.country)
    rank_base = base_result.rank_of(scenario.country)
    rank_scenario = scenario_result.rank_of(scenario.country)
    return ScenarioEvaluation(
        country=scenario.country,
        fitness_base=fitness_base,
        fitness_scenario=fitness_scenario,
        delta_fitness=fitness_scenario - fitness_base,
        rank_base=rank_base,
        rank_scenario=rank_scenario,
        delta_rank=rank_base - rank_scenario,
    )


@dataclass(frozen=True)
class ScenarioOutcome:
    mode: str
    algorithm: str
    country: str
    tier: str
    added: int
    fitness_base: float
    fitness_scenario: float
    delta_fitness: float
    rank_base: int
    rank_scenario: int
    delta_rank: int


@dataclass(frozen=True)
class TierAggregate:
    algorithm: str
    tier: str
    count: int
    mean_delta_fitness: float
    mean_delta_rank: float


@dataclass(eq=False)
class CounterfactualReport:
    """All scenario outcomes plus per-tier means for one simulation run."""

    mode: str
    length: int | None  # requested list length; None in virtual mode
    outcomes: list[ScenarioOutcome]
    tier_summary: list[TierAggregate]
    skipped: tuple[str, ...]
    improved: dict[str, tuple[int, int]]  # algorithm -> (improved, evaluated)


def _aggregate(mode, length, outcomes, skipped) -> CounterfactualReport:
    summary: list[TierAggregate] = []
    algorithms = sorted({o.algorithm for o in outcomes})
    improved: dict[str, tuple[int, int]] = {}
    for algorithm in algorithms:
        rows = [o for o in outcomes if o.algorithm == algorithm]
        improved[algorithm] = (sum(1 for o in rows if o.delta_fitness > 0), len(rows))
        for tier in ("top", "middle", "low"):
            tier_rows = [o for o in rows if o.tier == tier]
            if not tier_rows:
                continue
            summary.append(TierAggregate(
                algorithm=algorithm,
                tier=tier,
                count=len(tier_rows),
                mean_delta_fitness=sum(o.delta_fitness for o in tier_rows) / len(tier_rows),
                mean_delta_rank=sum(o.delta_rank for o in tier_rows) / len(tier_rows),
            ))
    return CounterfactualReport(mode, length, outcomes, summary, tuple(skipped), improved)


def _evaluate_many(
    jobs: list[tuple[str, str, str, Scenario]],
    base_result: FitnessResult,
    max_iter: int,
    window: int,
    threads: int,
) -> tuple[list[ScenarioOutcome], list[str]]:
    """Solve scenarios (optionally in parallel); order of results is fixed."""

    def work(job):
        algorithm, tier, country, scenario = job
        try:
            ev = evaluate_scenario(scenario, max_iter, window, base_result)
        except ConvergenceError as exc:
            return None, f"{algorithm} {country}: {exc}"
        return ScenarioOutcome(
            mode=scenario.mode,
            algorithm=algorithm,
            country=country,
            tier=tier,
            added=len(scenario.added),
            fitness_base=ev.fitness_base,
            fitness_scenario=ev.fitness_scenario,
            delta_fitness=ev.delta_fitness,
            rank_base=ev.rank_base,
            rank_scenario=ev.rank_scenario,
            delta_rank=ev.delta_rank,
        ), None

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(job) for job in jobs]

    outcomes = [r for r, _ in results if r is not None]
    skipped = [reason for _, reason in results if reason is not None]
    return outcomes, skipped


def _select(snapshot: BipartiteSnapshot, countries: Iterable[str] | None) -> tuple[str, ...]:
    if countries is None:
        return snapshot.countries
    chosen = tuple(sorted(set(countries)))
    unknown = [c for c in chosen if c not in snapshot.country_index]
    if unknown:
        raise DataError(f"countries not in snapshot: {', '.join(unknown)}")
    return chosen


def tier_report(
    snapshot: BipartiteSnapshot,
    algorithms: tuple[str, ...],
    length: int = DEFAULT_LIST_LENGTH,
    previous: BipartiteSnapshot | None = None,
    theta: float = DEFAULT_THETA,
    tau: int = DEFAULT_TAU,
    epsilon: float = DEFAULT_EPSILON,
    max_iter: int = DEFAULT_MAX_ITER,
    rank_stability_window: int = DEFAULT_STABILITY_WINDOW,
    countries: Iterable[str] | None = None,
    threads: int = 1,
    base_result: FitnessResult | None = None,
) -> CounterfactualReport:
    """Fixed-length simulation over every (algorithm, country) pair.

    Tiers come from the base network's fitness ranking. Countries whose
    candidate set is smaller than ``length`` get their full truncated list.
    Scenarios that fail to converge are skipped and reported. A pre-solved
    ``base_result`` (same snapshot, same settings) is reused when given.
    """
    if base_result is None:
        base_result = solve_fitness(snapshot, max_iter, rank_stability_window)
    if not base_result.converged:
        raise ConvergenceError(f"base network of {snapshot.year} did not converge")
    tiers = assign_tiers(base_result)
    selected = _select(snapshot, countries)

    jobs: list[tuple[str, str, str, Scenario]] = []
    skipped: list[str] = []
    for algorithm in algorithms:
        if length > 0:
            recs_all = recommend_all(
                algorithm, snapshot, previous,
                theta=theta, tau=tau, epsilon=epsilon, length=length,
            )
        for country in selected:
            if length > 0:
                recs = recs_all[country]
                added_length = min(length, len(recs.ranked_products))
            else:
                recs = RecommendationList(country, (), False, False,
                                          snapshot.fingerprint, algorithm)
                added_length = 0
            scenario = apply_recommendations(snapshot, country, recs, added_length)
            jobs.append((algorithm, tiers.tiers[country], country, scenario))

    outcomes, failed = _evaluate_many(jobs, base_result, max_iter,
                                      rank_stability_window, threads)
    skipped.extend(failed)
    return _aggregate(MODE_FIXED, length, outcomes, skipped)


def virtual_report(
    train: BipartiteSnapshot,
    test: BipartiteSnapshot,
    algorithms: tuple[str, ...],
    previous: BipartiteSnapshot | None = None,
    theta: float = DEFAULT_THETA,
    tau: int = DEFAULT_TAU,
    epsilon: float = DEFAULT_EPSILON,
    max_iter: int = DEFAULT_MAX_ITER,
    rank_stability_window: int = DEFAULT_STABILITY_WINDOW,
    countries: Iterable[str] | None = None,
    threads: int = 1,
    base_result: FitnessResult | None = None,
) -> CounterfactualReport:
    """Virtual-network simulation: per-country dynamic list lengths.

    For each country present in both years, its real link gains are replaced
    by equally many recommendations computed from the train year. Countries
    that gained nothing are counted as skipped. Deltas compare against the
    real test network.
    """
    if base_result is None:
        base_result = solve_fitness(test, max_iter, rank_stability_window)
    if not base_result.converged:
        raise ConvergenceError(f"test network of {test.year} did not converge")
    tiers = assign_tiers(base_result)
    candidates = [c for c in (countries if countries is not None else train.countries)
                  if c in train.country_index and c in test.country_index]
    candidates = sorted(set(candidates))

    jobs: list[tuple[str, str, str, Scenario]] = []
    skipped: list[str] = []
    for algorithm in algorithms:
        table = score_matrix(algorithm, train, previous, theta, tau, epsilon)
        for country in candidates:
            gained = new_exports(train, test, country)
            if not gained:
                skipped.append(f"{algorithm} {country}: no new exports to replace")
                continue
            recs = top_l(
                table.scores[train.country_index[country]], train, country,
                len(gained), algorithm=algorithm, params=table.params,
            )
            scenario = virtual_network(train, test, country, recs)
            jobs.append((algorithm, tiers.tiers[country], country, scenario))

    outcomes, failed = _evaluate_many(jobs, base_result, max_iter,
                                      rank_stability_window, threads)
    skipped.extend(failed)
    return _aggregate(MODE_VIRTUAL, None, outcomes, skipped)
