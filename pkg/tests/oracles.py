"""Independent brute-force implementations used as test oracles.

Everything here is deliberately written with plain Python loops and scalar
arithmetic, sharing no code path with the package under test.
"""

from __future__ import annotations


def walk_probs_matrix(adjacency: list[list[int]]) -> list[list[float]]:
    """Two-step walk enumeration: accumulate prob(b -> country j -> a)."""
    n_countries = len(adjacency)
    n_products = len(adjacency[0]) if n_countries else 0
    k_country = [sum(row) for row in adjacency]
    k_product = [sum(adjacency[i][j] for i in range(n_countries)) for j in range(n_products)]
    matrix = [[0.0] * n_products for _ in range(n_products)]
    for b in range(n_products):
        if k_product[b] == 0:
            continue
        for j in range(n_countries):
            if adjacency[j][b] and k_country[j]:
                for a in range(n_products):
                    if adjacency[j][a]:
                        matrix[a][b] += 1.0 / (k_product[b] * k_country[j])
    return matrix


def walk_probs_scores(adjacency: list[list[int]], country: int) -> list[float]:
    """Scores by enumerating every walk that starts on an exported product."""
    n_countries = len(adjacency)
    n_products = len(adjacency[0]) if n_countries else 0
    k_country = [sum(row) for row in adjacency]
    k_product = [sum(adjacency[i][j] for i in range(n_countries)) for j in range(n_products)]
    scores = [0.0] * n_products
    for b in range(n_products):
        if not adjacency[country][b] or k_product[b] == 0:
            continue
        for j in range(n_countries):
            if adjacency[j][b] and k_country[j]:
                for a in range(n_products):
                    if adjacency[j][a]:
                        scores[a] += 1.0 / (k_product[b] * k_country[j])
    return scores


def averaging_matrix(adjacency: list[list[int]]) -> list[list[float]]:
    """Row-normalized co-walk matrix, the averaging counterpart."""
    n_countries = len(adjacency)
    n_products = len(adjacency[0]) if n_countries else 0
    k_country = [sum(row) for row in adjacency]
    k_product = [sum(adjacency[i][j] for i in range(n_countries)) for j in range(n_products)]
    matrix = [[0.0] * n_products for _ in range(n_products)]
    for a in range(n_products):
        if k_product[a] == 0:
            continue
        for b in range(n_products):
            total = 0.0
            for j in range(n_countries):
                if adjacency[j][a] and adjacency[j][b] and k_country[j]:
                    total += 1.0 / k_country[j]
            matrix[a][b] = total / k_product[a]
    return matrix


def scalar_rca(values: dict[tuple[str, str], float], country: str, product: str) -> float:
    """Advantage ratio from scalar float arithmetic on a value mapping."""
    export = values.get((country, product), 0.0)
    product_total = sum(v for (_, p), v in values.items() if p == product)
    country_total = sum(v for (c, _), v in values.items() if c == country)
    world_total = sum(values.values())
    if export == 0 or product_total == 0 or country_total == 0:
        return 0.0
    return (export / product_total) / (country_total / world_total)


def direct_fitness_iteration(
    adjacency: list[list[int]], iterations: int
) -> tuple[list[float], list[float | None], list[list[float]]]:
    """Plain-loop fixed-point iteration with mean-1 renormalization per step.

    Products with no exporters stay None. Returns the final fitness and
    complexity plus the whole per-iteration fitness history (flat start
    included).
    """
    n_countries = len(adjacency)
    n_products = len(adjacency[0]) if n_countries else 0
    supported = [
        any(adjacency[i][j] for i in range(n_countries)) for j in range(n_products)
    ]
    fitness = [1.0] * n_countries
    complexity: list[float | None] = [1.0 if s else None for s in supported]
    history = [list(fitness)]
    for _ in range(iterations):
        new_fitness = [
            sum(complexity[j] for j in range(n_products) if adjacency[i][j])
            for i in range(n_countries)
        ]
        new_complexity: list[float | None] = []
        for j in range(n_products):
            if not supported[j]:
                new_complexity.append(None)
                continue
            inverse = sum(1.0 / fitness[i] for i in range(n_countries) if adjacency[i][j])
            new_complexity.append(1.0 / inverse)
        mean_f = sum(new_fitness) / n_countries
        supported_q = [q for q in new_complexity if q is not None]
        mean_q = sum(supported_q) / len(supported_q)
        fitness = [f / mean_f for f in new_fitness]
        complexity = [q / mean_q if q is not None else None for q in new_complexity]
        history.append(list(fitness))
    return fitness, complexity, history
