import numpy as np
import pytest

from tradefit import BipartiteSnapshot


@pytest.fixture
def toy_snapshot() -> BipartiteSnapshot:
    """A exports {p, q}; B exports {q, r}. Symmetric under (A,p)<->(B,r)."""
    return BipartiteSnapshot.build(
        2001, ["A", "B"], ["p", "q", "r"], np.array([[1, 1, 0], [0, 1, 1]])
    )


def random_snapshot(
    rng: np.random.Generator,
    max_countries: int = 6,
    max_products: int = 8,
    year: int = 2001,
    density: float = 0.45,
) -> BipartiteSnapshot:
    """Random valid snapshot: every country keeps at least one link."""
    n_countries = int(rng.integers(1, max_countries + 1))
    n_products = int(rng.integers(1, max_products + 1))
    adjacency = (rng.random((n_countries, n_products)) < density).astype(np.uint8)
    for i in range(n_countries):
        if adjacency[i].sum() == 0:
            adjacency[i, int(rng.integers(0, n_products))] = 1
    countries = [f"C{i:02d}" for i in range(n_countries)]
    products = [f"P{j:02d}" for j in range(n_products)]
    return BipartiteSnapshot.build(year, countries, products, adjacency)


def relabel(snapshot: BipartiteSnapshot, rng: np.random.Generator):
    """Rename nodes so sorting permutes rows/columns; same structure.

    Returns (relabeled snapshot, old->new country map, old->new product map).
    """
    n_c, n_p = len(snapshot.countries), len(snapshot.products)
    cperm = rng.permutation(n_c)
    pperm = rng.permutation(n_p)
    new_countries = [f"R{cperm[i]:03d}" for i in range(n_c)]
    new_products = [f"S{pperm[j]:03d}" for j in range(n_p)]
    relabeled_snapshot = BipartiteSnapshot.build(
        snapshot.year, new_countries, new_products, snapshot.adjacency,
        drop_empty_countries=False,
    )
    country_map = dict(zip(snapshot.countries, new_countries))
    product_map = dict(zip(snapshot.products, new_products))
    return relabeled_snapshot, country_map, product_map


def random_snapshot_pair(
    rng: np.random.Generator,
    max_countries: int = 6,
    max_products: int = 8,
    density: float = 0.45,
) -> tuple[BipartiteSnapshot, BipartiteSnapshot]:
    """(current, previous) snapshots sharing one product axis."""
    n_products = int(rng.integers(1, max_products + 1))
    products = [f"P{j:02d}" for j in range(n_products)]

    def one(year: int) -> BipartiteSnapshot:
        n_countries = int(rng.integers(1, max_countries + 1))
        adjacency = (rng.random((n_countries, n_products)) < density).astype(np.uint8)
        for i in range(n_countries):
            if adjacency[i].sum() == 0:
                adjacency[i, int(rng.integers(0, n_products))] = 1
        countries = [f"C{i:02d}" for i in range(n_countries)]
        return BipartiteSnapshot.build(year, countries, products, adjacency)

    return one(2006), one(2005)
