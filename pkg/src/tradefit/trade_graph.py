"""Export-record ingestion, comparative-advantage filtering, and yearly
binary country-product networks.

The chain is: a delimited export file is loaded into an :class:`ExportTable`
(duplicate keys summed, values kept as exact rationals), the comparative
advantage ratio is computed per year, and thresholding the ratio yields one
:class:`BipartiteSnapshot` per year. All snapshots built from one table share
the same product axis (the union over every loaded year), so matrices stay
dimension-aligned across time.

Values are carried as :class:`fractions.Fraction` internally. This makes the
advantage ratio exact: rescaling every export value by a common constant
leaves the ratio matrix bit-identical, and the threshold comparison at
exactly 1 is never subject to rounding.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import DataError

CACHE_MANIFEST = "manifest.json"


@dataclass(frozen=True)
class ExportRecord:
    year: int
    country: str
    product: str
    value: Fraction


@dataclass(eq=False)
class ExportTable:
    """Deduplicated (year, country, product, value) export records.

    Records are stored sorted by (year, country, product); duplicate keys
    have already been summed at load time. ``products`` is the union over
    all retained years and defines the shared product axis of every
    snapshot built from this table.
    """

    records: tuple[ExportRecord, ...]

    @cached_property
    def years(self) -> tuple[int, ...]:
        return tuple(sorted({r.year for r in self.records}))

    @cached_property
    def products(self) -> tuple[str, ...]:
        return tuple(sorted({r.product for r in self.records}))

    @cached_property
    def countries(self) -> tuple[str, ...]:
        return tuple(sorted({r.country for r in self.records}))

    def countries_in(self, year: int) -> tuple[str, ...]:
        return tuple(sorted({r.country for r in self.records if r.year == year}))

    def pivot(self, year: int) -> dict[tuple[str, str], Fraction]:
        """(country, product) -> value mapping for one year."""
        return {
            (r.country, r.product): r.value
            for r in self.records
            if r.year == year
        }


def load_exports(path: str | Path, year_range: tuple[int, int]) -> ExportTable:
    """Read a ``year,country,product,value`` file into an ExportTable.

    Keeps records whose year lies in the inclusive ``year_range``. Duplicate
    (year, country, product) keys are summed. Zero values are retained,
    negative values are rejected. Errors name the offending line number.
    """
    path = Path(path)
    lo, hi = year_range
    if lo > hi:
        raise DataError(f"invalid year range {lo}:{hi} (start after end)")
    if not path.exists():
        raise DataError(f"input file not found: {path}")

    merged: dict[tuple[int, str, str], Fraction] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        if [h.strip() for h in header] != ["year", "country", "product", "value"]:
            raise DataError(
                f"{path}: line 1: expected header 'year,country,product,value'"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise DataError(f"{path}: line {lineno}: expected 4 fields, got {len(row)}")
            year_text, country, product, value_text = (f.strip() for f in row)
            try:
                year = int(year_text)
            except ValueError:
                raise DataError(f"{path}: line {lineno}: bad year {year_text!r}") from None
            if not country or not product:
                raise DataError(f"{path}: line {lineno}: empty country or product id")
            try:
                value = Fraction(value_text)
            except (ValueError, ZeroDivisionError):
                raise DataError(f"{path}: line {lineno}: bad value {value_text!r}") from None
            if value < 0:
                raise DataError(f"{path}: line {lineno}: negative value {value_text!r}")
            if not lo <= year <= hi:
                continue
            key = (year, country, product)
            merged[key] = merged.get(key, Fraction(0)) + value

    if not merged:
        raise DataError(f"{path}: no records within years {lo}:{hi}")
    records = tuple(
        ExportRecord(year, country, product, merged[(year, country, product)])
        for year, country, product in sorted(merged)
    )
    return ExportTable(records)


@dataclass(eq=False)
class RcaMatrix:
    """Comparative-advantage ratios for one year.

    ``values[i, j]`` is the share of country i in world exports of product j
    divided by the share of country i in total world exports. Countries are
    those with at least one record in the year; products span the table's
    full product axis. Entries whose country or product total is zero are 0.
    """

    year: int
    countries: tuple[str, ...]
    products: tuple[str, ...]
    values: np.ndarray


def _exact_rca(table: ExportTable, year: int) -> tuple[tuple[str, ...], tuple[str, ...], list[list[Fraction]]]:
    if year not in table.years:
        raise DataError(
            f"year {year} not present in export table (have {table.years[0]}..{table.years[-1]})"
        )
    countries = table.countries_in(year)
    products = table.products
    cells = table.pivot(year)

    zero = Fraction(0)
    row_total = {c: zero for c in countries}
    col_total = {p: zero for p in products}
    for (c, p), v in cells.items():
        row_total[c] += v
        col_total[p] += v
    world = sum(row_total.values(), zero)
    if world == 0:
        raise DataError(f"world export total is zero for year {year}")

    ratios: list[list[Fraction]] = []
    for c in countries:
        rt = row_total[c]
        row: list[Fraction] = []
        for p in products:
            v = cells.get((c, p), zero)
            ct = col_total[p]
            if v == 0 or ct == 0 or rt == 0:
                row.append(zero)
            else:
                row.append((v * world) / (ct * rt))
        ratios.append(row)
    return countries, products, ratios


def compute_rca(table: ExportTable, year: int) -> RcaMatrix:
    """Comparative-advantage ratio matrix for ``year``, as float64.

    Each entry is the exact rational ratio rounded once to binary64, so the
    matrix is invariant under any common rescaling of the export values.
    """
    countries, products, ratios = _exact_rca(table, year)
    values = np.array([[float(x) for x in row] for row in ratios], dtype=np.float64)
    values = np.ascontiguousarray(values.reshape(len(countries), len(products)))
    return RcaMatrix(year, countries, products, values)


@dataclass(eq=False)
class BipartiteSnapshot:
    """Binary country-product network for one year.

    ``adjacency[i, j] == 1`` marks country i as an exporter of product j.
    Countries with no links are dropped at construction; products with no
    links are kept so the product axis stays aligned across years. Country
    and product orderings are lexicographic, and the arrays are read-only.
    """

    year: int
    countries: tuple[str, ...]
    products: tuple[str, ...]
    adjacency: np.ndarray = field(repr=False)
    country_degrees: np.ndarray = field(repr=False)
    product_degrees: np.ndarray = field(repr=False)

    @classmethod
    def build(
        cls,
        year: int,
        countries: tuple[str, ...] | list[str],
        products: tuple[str, ...] | list[str],
        adjacency: np.ndarray,
        drop_empty_countries: bool = True,
    ) -> "BipartiteSnapshot":
        adjacency = np.ascontiguousarray(np.asarray(adjacency, dtype=np.uint8))
        if adjacency.shape != (len(countries), len(products)):
            raise ValueError(
                f"adjacency shape {adjacency.shape} does not match "
                f"{len(countries)} countries x {len(products)} products"
            )
        if adjacency.size and adjacency.max() > 1:
            raise ValueError("adjacency must be binary")
        if len(set(countries)) != len(countries) or len(set(products)) != len(products):
            raise ValueError("duplicate country or product ids")

        c_order = sorted(range(len(countries)), key=lambda i: countries[i])
        p_order = sorted(range(len(products)), key=lambda j: products[j])
        adjacency = adjacency[np.asarray(c_order, dtype=np.intp), :][:, np.asarray(p_order, dtype=np.intp)]
        countries = tuple(countries[i] for i in c_order)
        products = tuple(products[j] for j in p_order)

        if drop_empty_countries and len(countries):
            keep = adjacency.sum(axis=1) > 0
            adjacency = adjacency[keep]
            countries = tuple(c for c, k in zip(countries, keep) if k)

        return cls._finalize(year, countries, products, adjacency)

    @classmethod
    def _finalize(cls, year, countries, products, adjacency) -> "BipartiteSnapshot":
        adjacency = np.ascontiguousarray(adjacency, dtype=np.uint8)
        country_degrees = adjacency.sum(axis=1, dtype=np.int64)
        product_degrees = adjacency.sum(axis=0, dtype=np.int64)
        for arr in (adjacency, country_degrees, product_degrees):
            arr.setflags(write=False)
        return cls(year, tuple(countries), tuple(products), adjacency,
                   country_degrees, product_degrees)

    @cached_property
    def country_index(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.countries)}

    @cached_property
    def product_index(self) -> dict[str, int]:
        return {p: j for j, p in enumerate(self.products)}

    @cached_property
    def fingerprint(self) -> str:
        """Content hash: year, orderings, and the full adjacency."""
        digest = hashlib.sha256()
        digest.update(str(self.year).encode())
        digest.update(b"\x1d")
        digest.update("\x1f".join(self.countries).encode())
        digest.update(b"\x1d")
        digest.update("\x1f".join(self.products).encode())
        digest.update(b"\x1d")
        digest.update(self.adjacency.tobytes())
        return digest.hexdigest()

    @property
    def link_count(self) -> int:
        return int(self.country_degrees.sum())

    def country_row(self, country: str) -> np.ndarray:
        try:
            return self.adjacency[self.country_index[country]]
        except KeyError:
            raise DataError(f"country {country!r} not in snapshot for {self.year}") from None

    def exported(self, country: str) -> tuple[str, ...]:
        row = self.country_row(country)
        return tuple(p for p, a in zip(self.products, row) if a)

    def with_country_row(self, country: str, row: np.ndarray) -> "BipartiteSnapshot":
        """New snapshot with one country's links replaced, all else untouched."""
        i = self.country_index.get(country)
        if i is None:
            raise DataError(f"country {country!r} not in snapshot for {self.year}")
        row = np.asarray(row, dtype=np.uint8)
        if row.shape != (len(self.products),):
            raise ValueError("replacement row has wrong length")
        adjacency = self.adjacency.copy()
        adjacency[i] = row
        return self._finalize(self.year, self.countries, self.products, adjacency)


def build_snapshot(table: ExportTable, year: int, threshold: float = 1.0) -> BipartiteSnapshot:
    """Threshold the advantage ratio into a binary snapshot for ``year``.

    A link is present iff the exact ratio is >= ``threshold`` (the binary64
    value of the threshold is used, converted to an exact rational, so the
    comparison never suffers rounding). Countries left with no links are
    dropped from the snapshot.
    """
    countries, products, ratios = _exact_rca(table, year)
    cut = Fraction(threshold)
    if cut <= 0:
        raise DataError(f"threshold must be positive, got {threshold}")
    adjacency = np.array(
        [[1 if x >= cut else 0 for x in row] for row in ratios], dtype=np.uint8
    ).reshape(len(countries), len(products))
    return BipartiteSnapshot.build(year, countries, products, adjacency)


def build_snapshots(
    table: ExportTable, threshold: float = 1.0
) -> dict[int, BipartiteSnapshot]:
    """One snapshot per year present in the table, shared product axis."""
    return {year: build_snapshot(table, year, threshold) for year in table.years}


# --- snapshot cache -------------------------------------------------------
#
# One JSON file per year: {"year", "countries", "products", "rows"} where
# rows are "0"/"1" strings, one per country. Exact round trip by design.

def save_snapshot(snapshot: BipartiteSnapshot, path: str | Path) -> None:
    payload = {
        "year": snapshot.year,
        "countries": list(snapshot.countries),
        "products": list(snapshot.products),
        "rows": ["".join(str(int(a)) for a in row) for row in snapshot.adjacency],
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, sort_keys=True, separators=(",", ":"))
        handle.write("\n")


def load_snapshot(path: str | Path) -> BipartiteSnapshot:
    path = Path(path)
    if not path.exists():
        raise DataError(f"snapshot file not found: {path}")
    with open(path, encoding="utf-8") as handle:
        payload = json.load(handle)
    try:
        rows = payload["rows"]
        adjacency = np.array([[int(ch) for ch in row] for row in rows], dtype=np.uint8)
        adjacency = adjacency.reshape(len(payload["countries"]), len(payload["products"]))
        return BipartiteSnapshot.build(
            payload["year"], payload["countries"], payload["products"], adjacency,
            drop_empty_countries=False,
        )
    except (KeyError, ValueError) as exc:
        raise DataError(f"{path}: corrupt snapshot cache: {exc}") from None


def write_cache(
    directory: str | Path,
    snapshots: dict[int, BipartiteSnapshot],
    meta: dict,
) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for year, snapshot in sorted(snapshots.items()):
        save_snapshot(snapshot, directory / f"snapshot_{year}.json")
    manifest = dict(meta)
    manifest["years"] = sorted(snapshots)
    with open(directory / CACHE_MANIFEST, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, sort_keys=True, separators=(",", ":"))
        handle.write("\n")


def read_manifest(directory: str | Path) -> dict:
    path = Path(directory) / CACHE_MANIFEST
    if not path.exists():
        raise DataError(f"snapshot cache manifest not found: {path}")
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def load_cached_snapshot(directory: str | Path, year: int) -> BipartiteSnapshot:
    return load_snapshot(Path(directory) / f"snapshot_{year}.json")
