"""Product-recommendation scores on a bipartite export network.

Five scorers share one interface: ``probs`` (mass-conserving two-step random
walk), ``heats`` (its row-normalized, averaging counterpart), ``degree``
(current product popularity), ``di`` (popularity growth over a time window
with an epsilon tie-break on current degree), and ``tprobs`` (the random-walk
score damped by relative popularity growth raised to an exponent).

Scores for products a country already exports are zeroed before ranking, so
recommendation lists never contain current exports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .trade_graph import BipartiteSnapshot

ALGORITHMS = ("probs", "heats", "di", "tprobs", "degree")

DEFAULT_THETA = 0.2
DEFAULT_TAU = 1
DEFAULT_EPSILON = 1e-6
DEFAULT_LIST_LENGTH = 20


def _inverse(values: np.ndarray) -> np.ndarray:
    out = np.zeros(len(values), dtype=np.float64)
    np.divide(1.0, values, out=out, where=values > 0)
    return out


def cowalk_matrix(snapshot: BipartiteSnapshot) -> np.ndarray:
    """C[a, b] = sum_j adj[j, a] * adj[j, b] / k_j, the shared two-step core.

    Entry (a, b) accumulates, over every country j exporting both products,
    the probability 1/k_j of stepping from j to a after arriving from b.
    """
    adj = snapshot.adjacency.astype(np.float64)
    inv_kc = _inverse(snapshot.country_degrees.astype(np.float64))
    return np.ascontiguousarray((adj * inv_kc[:, None]).T @ adj)


def probs_matrix(snapshot: BipartiteSnapshot) -> np.ndarray:
    """Column-normalized spreading matrix W; each supported column sums to 1."""
    inv_kp = _inverse(snapshot.product_degrees.astype(np.float64))
    return cowalk_matrix(snapshot) * inv_kp[None, :]


def heats_matrix(snapshot: BipartiteSnapshot) -> np.ndarray:
    """Row-normalized spreading matrix; equals the transpose of probs_matrix."""
    inv_kp = _inverse(snapshot.product_degrees.astype(np.float64))
    return cowalk_matrix(snapshot) * inv_kp[:, None]


def _resource_vector(snapshot: BipartiteSnapshot, country: str) -> np.ndarray:
    return snapshot.country_row(country).astype(np.float64)


def _mask_exported(scores: np.ndarray, snapshot: BipartiteSnapshot, country: str) -> np.ndarray:
    masked = scores.copy()
    masked[snapshot.country_row(country) == 1] = 0.0
    return masked


def probs_scores(
    snapshot: BipartiteSnapshot, country: str, mask_exported: bool = True
) -> np.ndarray:
    """Random-walk resource landed on each product for one country.

    The raw vector conserves mass: its sum equals the country's degree.
    With ``mask_exported`` (the default) currently exported products are
    zeroed, which is the form recommendation lists are built from.
    """
    scores = probs_matrix(snapshot) @ _resource_vector(snapshot, country)
    if mask_exported:
        scores = _mask_exported(scores, snapshot, country)
    return scores


def heats_scores(
    snapshot: BipartiteSnapshot, country: str, mask_exported: bool = True
) -> np.ndarray:
    """Averaging-process score; favors low-degree products."""
    scores = heats_matrix(snapshot) @ _resource_vector(snapshot, country)
    if mask_exported:
        scores = _mask_exported(scores, snapshot, country)
    return scores


def degree_scores(snapshot: BipartiteSnapshot) -> np.ndarray:
    """Country-independent popularity score: the current product degree."""
    return snapshot.product_degrees.astype(np.float64)


def _check_same_products(current: BipartiteSnapshot, previous: BipartiteSnapshot) -> None:
    if current.products != previous.products:
        raise DataError(
            "snapshots do not share a product axis "
            f"({len(current.products)} vs {len(previous.products)} products)"
        )


def _ranking_preserved(delta: np.ndarray, scores: np.ndarray) -> bool:
    # Strictly larger delta must still strictly outrank after the tie-break
    # term is added.
    order = np.argsort(-delta, kind="stable")
    d = delta[order]
    s = scores[order]
    i = 0
    previous_min: float | None = None
    while i < len(d):
        j = i
        while j < len(d) and d[j] == d[i]:
            j += 1
        group = s[i:j]
        if previous_min is not None and previous_min <= group.max():
            return False
        previous_min = float(group.min())
        i = j
    return True


def safe_epsilon(
    k_now: np.ndarray, k_previous: np.ndarray, epsilon: float = DEFAULT_EPSILON
) -> float:
    """Shrink epsilon by factors of 10 until it cannot reorder the degree-
    growth ranking (it then only breaks exact ties, by current degree)."""
    if not (math.isfinite(epsilon) and epsilon > 0):
        raise DataError(f"epsilon must be positive and finite, got {epsilon}")
    delta = k_now.astype(np.float64) - k_previous.astype(np.float64)
    for _ in range(600):
        if _ranking_preserved(delta, delta + epsilon * k_now):
            return epsilon
        epsilon /= 10.0
    raise DataError("could not find a ranking-safe epsilon")


def degree_increase_scores(
    current: BipartiteSnapshot,
    previous: BipartiteSnapshot,
    epsilon: float = DEFAULT_EPSILON,
    validate: bool = True,
) -> np.ndarray:
    """Degree growth per product with an epsilon * current-degree tie-break.

    Scores can be negative for products losing exporters; ranking semantics
    are what matters. With ``validate`` the epsilon is first shrunk until it
    provably preserves the plain degree-growth ranking.
    """
    _check_same_products(current, previous)
    if validate:
        epsilon = safe_epsilon(current.product_degrees, previous.product_degrees, epsilon)
    k_now = current.product_degrees.astype(np.float64)
    k_prev = previous.product_degrees.astype(np.float64)
    return (k_now - k_prev) + epsilon * k_now


def _growth_multiplier(
    current: BipartiteSnapshot,
    previous: BipartiteSnapshot,
    theta: float,
    epsilon: float,
) -> np.ndarray:
    """(relative degree growth) ** theta per product; 0 where the current
    degree is zero or the growth ratio is non-positive."""
    k_now = current.product_degrees.astype(np.float64)
    growth = degree_increase_scores(current, previous, epsilon)
    ratio = np.divide(growth, k_now, out=np.zeros_like(growth), where=k_now > 0)
    multiplier = np.zeros_like(ratio)
    positive = ratio > 0
    multiplier[positive] = ratio[positive] ** theta
    return multiplier


def tprobs_scores(
    current: BipartiteSnapshot,
    previous: BipartiteSnapshot,
    country: str,
    theta: float = DEFAULT_THETA,
    epsilon: float = DEFAULT_EPSILON,
    mask_exported: bool = True,
) -> np.ndarray:
    """Random-walk score scaled by (relative degree growth) ** theta.

    theta = 0 reduces exactly to the plain random-walk score (the multiplier
    is defined as 1 regardless of base). Products with zero current degree,
    or with non-positive growth ratio, score 0 under any positive theta.
    """
    if not math.isfinite(theta):
        raise DataError(f"theta must be finite, got {theta}")
    _check_same_products(current, previous)
    base = probs_scores(current, country, mask_exported=False)
    if theta == 0.0:
        scores = base.copy()
    else:
        scores = base * _growth_multiplier(current, previous, theta, epsilon)
    if mask_exported:
        scores = _mask_exported(scores, current, country)
    return scores


@dataclass(eq=False)
class ScoreMatrix:
    """All-country score table for one algorithm on one snapshot.

    Scores are finite and non-negative, and exactly 0 for every
    (country, product) pair already linked in the snapshot.
    """

    algorithm: str
    year: int
    countries: tuple[str, ...]
    products: tuple[str, ...]
    scores: np.ndarray = field(repr=False)
    params: dict = field(default_factory=dict)


def score_matrix(
    algorithm: str,
    snapshot: BipartiteSnapshot,
    previous: BipartiteSnapshot | None = None,
    theta: float = DEFAULT_THETA,
    tau: int = DEFAULT_TAU,
    epsilon: float = DEFAULT_EPSILON,
) -> ScoreMatrix:
    """Compute masked scores for every country under one algorithm.

    ``previous`` (the snapshot tau years back) is required for the
    time-aware algorithms ``di`` and ``tprobs``. Degree-growth scores are
    shifted up by a constant when negative growth occurs, preserving the
    ranking while keeping the stored matrix non-negative.
    """
    if algorithm not in ALGORITHMS:
        raise DataError(f"unknown algorithm {algorithm!r} (expected one of {ALGORITHMS})")
    adj = snapshot.adjacency
    params: dict = {}

    if algorithm in ("di", "tprobs"):
        if previous is None:
            raise DataError(f"algorithm {algorithm!r} needs the snapshot tau={tau} years back")
        _check_same_products(snapshot, previous)
        eps_used = safe_epsilon(snapshot.product_degrees, previous.product_degrees, epsilon)
        params = {"tau": tau, "epsilon": eps_used}

    if algorithm == "probs":
        scores = adj.astype(np.float64) @ probs_matrix(snapshot).T
    elif algorithm == "heats":
        scores = adj.astype(np.float64) @ heats_matrix(snapshot).T
    elif algorithm == "degree":
        scores = np.tile(degree_scores(snapshot), (len(snapshot.countries), 1))
    elif algorithm == "di":
        vector = degree_increase_scores(snapshot, previous, params["epsilon"], validate=False)
        if len(vector) and vector.min() < 0:
            vector = vector - vector.min()
        scores = np.tile(vector, (len(snapshot.countries), 1))
    else:  # tprobs
        params["theta"] = theta
        base = adj.astype(np.float64) @ probs_matrix(snapshot).T
        if theta == 0.0:
            scores = base
        else:
            scores = base * _growth_multiplier(
                snapshot, previous, theta, params["epsilon"])[None, :]

    scores = np.ascontiguousarray(scores, dtype=np.float64)
    scores[adj == 1] = 0.0
    if not np.all(np.isfinite(scores)):
        raise DataError(f"non-finite {algorithm} scores (check theta/epsilon)")
    return ScoreMatrix(algorithm, snapshot.year, snapshot.countries,
                       snapshot.products, scores, params)


@dataclass(eq=False)
class RecommendationList:
    """Ranked non-exported products for one country.

    ``padded`` marks lists that had to include zero-score products to reach
    the requested length; ``truncated`` marks countries with fewer candidate
    products than requested. ``snapshot_fingerprint`` ties the list to the
    exact network it was computed from.
    """

    country: str
    ranked_products: tuple[tuple[str, float], ...]
    padded: bool
    truncated: bool
    snapshot_fingerprint: str
    algorithm: str = ""
    params: dict = field(default_factory=dict)

    @property
    def products(self) -> tuple[str, ...]:
        return tuple(p for p, _ in self.ranked_products)


def top_l(
    scores: np.ndarray,
    snapshot: BipartiteSnapshot,
    country: str,
    length: int = DEFAULT_LIST_LENGTH,
    algorithm: str = "",
    params: dict | None = None,
) -> RecommendationList:
    """Best ``length`` non-exported products by (score desc, product id asc).

    Ties break lexicographically on product id. If fewer than ``length``
    products carry positive score the list is filled from the zero-score
    candidates in tie-break order and flagged padded; if fewer candidates
    exist at all, everything is returned and flagged truncated.
    """
    if length < 1:
        raise DataError(f"recommendation list length must be >= 1, got {length}")
    row = snapshot.country_row(country)
    candidates = [j for j in range(len(snapshot.products)) if not row[j]]
    candidates.sort(key=lambda j: (-scores[j], snapshot.products[j]))
    taken = candidates[:length]
    return RecommendationList(
        country=country,
        ranked_products=tuple((snapshot.products[j], float(scores[j])) for j in taken),
        padded=any(scores[j] <= 0 for j in taken),
        truncated=len(candidates) < length,
        snapshot_fingerprint=snapshot.fingerprint,
        algorithm=algorithm,
        params=dict(params or {}),
    )


def recommend_all(
    algorithm: str,
    snapshot: BipartiteSnapshot,
    previous: BipartiteSnapshot | None = None,
    theta: float = DEFAULT_THETA,
    tau: int = DEFAULT_TAU,
    epsilon: float = DEFAULT_EPSILON,
    length: int = DEFAULT_LIST_LENGTH,
) -> dict[str, RecommendationList]:
    """Top-length list per country, sharing one score matrix computation."""
    table = score_matrix(algorithm, snapshot, previous, theta, tau, epsilon)
    return {
        country: top_l(table.scores[i], snapshot, country, length,
                       algorithm=algorithm, params=table.params)
        for i, country in enumerate(snapshot.countries)
    }
