"""Country fitness and product complexity via a coupled nonlinear fixed point.

Each iteration maps the previous complexity vector to a new fitness vector
(row sums of complexity over a country's exports) and the previous fitness
vector to a new complexity vector (the reciprocal of the summed reciprocal
fitness of a product's exporters, so the weakest exporter dominates). Both
vectors are rescaled to mean 1 after every step; the raw formulas alone are
scale-divergent.

Iteration stops once the country ranking has been unchanged for a given
number of consecutive steps. Rankings stabilize long before the values
settle (some of which drift toward zero), which is why the stopping rule is
rank-based rather than a value tolerance.

All reductions sum their operands in sorted order. Sorting canonicalizes the
addition order, so relabeling countries or products permutes the computed
values bitwise-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .trade_graph import BipartiteSnapshot

DEFAULT_MAX_ITER = 5000
DEFAULT_STABILITY_WINDOW = 50

TIER_NAMES = ("top", "middle", "low")


def _row_sums(matrix: np.ndarray) -> np.ndarray:
    """Per-row sums with the addends in sorted order (permutation-stable)."""
    matrix = np.ascontiguousarray(matrix)
    return np.sum(np.sort(matrix, axis=1), axis=1)


def _col_sums(matrix: np.ndarray) -> np.ndarray:
    matrix = np.ascontiguousarray(matrix)
    return np.sum(np.sort(matrix, axis=0), axis=0)


def _mean(vector: np.ndarray) -> float:
    vector = np.ascontiguousarray(vector)
    return float(np.sum(np.sort(vector)) / vector.size)


def fitness_step(adjacency: np.ndarray, complexity: np.ndarray) -> np.ndarray:
    """One raw fitness update: per-country sum of exported-product complexity.

    NaN complexity entries (products excluded from the update because nobody
    exports them) contribute nothing.
    """
    adj = np.ascontiguousarray(adjacency, dtype=np.float64)
    filled = np.where(np.isfinite(complexity), complexity, 0.0)
    return _row_sums(adj * filled[None, :])


def complexity_step(adjacency: np.ndarray, fitness: np.ndarray) -> np.ndarray:
    """One raw complexity update: harmonic-style aggregation over exporters.

    The result for a product is 1 / sum(1 / fitness) over its exporters, so
    it is bounded above by the weakest exporter's fitness. Products with no
    exporters get NaN (they are excluded from the update).
    """
    adj = np.ascontiguousarray(adjacency, dtype=np.float64)
    fitness = np.asarray(fitness, dtype=np.float64)
    if np.any(fitness <= 0) or not np.all(np.isfinite(fitness)):
        raise DataError("fitness values must be positive and finite")
    inverse_sum = _col_sums(adj * (1.0 / fitness)[:, None])
    out = np.full(adj.shape[1], np.nan)
    supported = adj.sum(axis=0) > 0
    out[supported] = 1.0 / inverse_sum[supported]
    return out


def _ordering(fitness: np.ndarray) -> np.ndarray:
    """Country indices by descending fitness; exact ties by index (= id order)."""
    return np.lexsort((np.arange(len(fitness)), -fitness))


def _dense_ranks(fitness: np.ndarray) -> np.ndarray:
    """0-based descending ranks where exactly-tied values share a rank.

    Depends only on the value multiset, never on labels, so the stopping
    rule built on it is invariant under relabeling.
    """
    unique, inverse = np.unique(fitness, return_inverse=True)
    return (len(unique) - 1) - inverse


@dataclass(eq=False)
class FitnessResult:
    """Converged (or best-effort) fitness/complexity state for one snapshot.

    ``ranks[i]`` is the 1-based rank of ``countries[i]`` (exact ties broken
    by country id); ``complexity`` is NaN for products with no exporters.
    ``residual_history[n]`` counts the countries whose position in the
    fitness ordering moved at iteration n+1, with tied values sharing a
    position.
    """

    year: int
    countries: tuple[str, ...]
    products: tuple[str, ...]
    fitness: np.ndarray = field(repr=False)
    complexity: np.ndarray = field(repr=False)
    ranks: np.ndarray = field(repr=False)
    iterations: int
    converged: bool
    residual_history: tuple[int, ...] = field(repr=False)

    @property
    def ordering(self) -> np.ndarray:
        return _ordering(self.fitness)

    def fitness_of(self, country: str) -> float:
        return float(self.fitness[self.countries.index(country)])

    def rank_of(self, country: str) -> int:
        return int(self.ranks[self.countries.index(country)])


def solve_fitness(
    snapshot: BipartiteSnapshot,
    max_iter: int = DEFAULT_MAX_ITER,
    rank_stability_window: int = DEFAULT_STABILITY_WINDOW,
) -> FitnessResult:
    """Iterate the coupled updates from a flat start until ranks stabilize.

    Both vectors start at 1 and are renormalized to mean 1 after every
    iteration. Products nobody exports are excluded throughout (NaN in the
    result). Stops early when no country has moved in the fitness ordering
    for ``rank_stability_window`` consecutive iterations (the comparison is
    on values only, so it is label-independent); otherwise runs to
    ``max_iter`` and reports ``converged=False``. If an update degenerates
    numerically (zero or non-finite values), the last valid state is kept.
    """
    if len(snapshot.countries) == 0:
        raise DataError(f"snapshot for {snapshot.year} has no countries")
    if max_iter < 1 or rank_stability_window < 1:
        raise DataError("max_iter and rank_stability_window must be >= 1")

    adj = np.ascontiguousarray(snapshot.adjacency, dtype=np.float64)
    n_countries = len(snapshot.countries)
    supported = snapshot.product_degrees > 0

    fitness = np.ones(n_countries)
    complexity = np.where(supported, 1.0, np.nan)

    dense = _dense_ranks(fitness)
    history: list[int] = []
    stable = 0
    converged = False
    iterations = 0

    for _ in range(max_iter):
        new_fitness = fitness_step(adj, complexity)
        new_complexity = complexity_step(adj, fitness)

        mean_f = _mean(new_fitness)
        supported_q = new_complexity[supported]
        mean_q = _mean(supported_q) if supported_q.size else 1.0
        if not (np.isfinite(mean_f) and mean_f > 0 and np.isfinite(mean_q) and mean_q > 0):
            break
        new_fitness = new_fitness / mean_f
        new_complexity = new_complexity / mean_q

        ok_f = np.all(np.isfinite(new_fitness)) and np.all(new_fitness > 0)
        ok_q = np.all(np.isfinite(new_complexity[supported])) and np.all(new_complexity[supported] > 0)
        if not (ok_f and ok_q):
            break

        fitness, complexity = new_fitness, new_complexity
        iterations += 1

        new_dense = _dense_ranks(fitness)
        changes = int(np.count_nonzero(new_dense != dense))
        history.append(changes)
        dense = new_dense

        stable = stable + 1 if changes == 0 else 0
        if stable >= rank_stability_window:
            converged = True
            break

    ranks = np.empty(n_countries, dtype=np.int64)
    ranks[_ordering(fitness)] = np.arange(1, n_countries + 1)
    fitness = np.ascontiguousarray(fitness)
    complexity = np.ascontiguousarray(complexity)
    for arr in (fitness, complexity, ranks):
        arr.setflags(write=False)
    return FitnessResult(
        year=snapshot.year,
        countries=snapshot.countries,
        products=snapshot.products,
        fitness=fitness,
        complexity=complexity,
        ranks=ranks,
        iterations=iterations,
        converged=converged,
        residual_history=tuple(history),
    )


@dataclass(eq=False)
class TierAssignment:
    """Country -> tier name ('top' / 'middle' / 'low') by fitness rank."""

    tiers: dict[str, str]

    def members(self, tier: str) -> tuple[str, ...]:
        return tuple(sorted(c for c, t in self.tiers.items() if t == tier))


def assign_tiers(result: FitnessResult) -> TierAssignment:
    """Split countries into three near-equal tiers by descending fitness.

    When the count is not divisible by 3 the extra countries go to the lower
    tiers first (low, then middle), e.g. 181 -> 60/60/61 top/middle/low.
    """
    n = len(result.countries)
    if n < 3:
        raise DataError(f"tier assignment needs at least 3 countries, got {n}")
    base, rem = divmod(n, 3)
    sizes = {
        "top": base,
        "middle": base + (1 if rem == 2 else 0),
        "low": base + (1 if rem >= 1 else 0),
    }
    ordered = [result.countries[i] for i in result.ordering]
    tiers: dict[str, str] = {}
    start = 0
    for name in TIER_NAMES:
        for country in ordered[start:start + sizes[name]]:
            tiers[country] = name
        start += sizes[name]
    return TierAssignment(tiers)
