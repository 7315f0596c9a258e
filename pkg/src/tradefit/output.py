"""Deterministic output writing with provenance headers.

Every artifact starts with a provenance header carrying the tool version,
a hash of the fully resolved run configuration, and a hash of the input
data. Identical config + input therefore produce byte-identical files.
Delimited tables use two leading ``#`` comment lines; JSON-lines files use
a leading provenance record instead, so every line stays valid JSON.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable

VERSION = "0.1.0"


def fmt(value) -> str:
    """Render a cell: floats get 12 significant digits, the rest str()."""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


class Provenance:
    def __init__(self, config: dict, input_hash: str):
        self.config = config
        self.input_hash = input_hash
        self.config_hash = config_hash(config)

    def comment_lines(self) -> list[str]:
        return [
            f"# tradefit={VERSION} config_hash={self.config_hash} input_hash={self.input_hash}",
            f"# config {canonical_json(self.config)}",
        ]

    def record(self) -> dict:
        return {
            "provenance": {
                "version": VERSION,
                "config_hash": self.config_hash,
                "input_hash": self.input_hash,
                "config": self.config,
            }
        }


def write_table(
    path: str | Path,
    columns: tuple[str, ...],
    rows: Iterable[tuple],
    provenance: Provenance,
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = provenance.comment_lines()
    lines.append(",".join(columns))
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row width {len(row)} != header width {len(columns)}")
        lines.append(",".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def significant(value: float) -> float:
    """Round a float through its 12-significant-digit decimal form."""
    return float(f"{value:.12g}")


def write_jsonl(path: str | Path, records: Iterable[dict], provenance: Provenance) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [canonical_json(provenance.record())]
    lines.extend(canonical_json(record) for record in records)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
