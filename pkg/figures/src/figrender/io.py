"""Read-only access to the CSV + JSON-sidecar artifacts.

The renderer consumes the files exactly as written by the producing CLI:
a comma-separated table with a header line, and a sidecar named after the
same run id (``bn_<id>.csv`` with ``bn_<id>.json``) carrying the config
echo. Nothing here ever writes into an input directory.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path


class SchemaError(ValueError):
    """An input table lacks a column the recipe needs."""


class EmptyInputError(ValueError):
    """No input files matched, or a matched table carries no data rows."""


def expand_inputs(patterns) -> list[Path]:
    """Resolve glob patterns to a sorted, de-duplicated file list.

    Sorting keeps curve order, colors, and therefore the rendered bytes
    independent of filesystem enumeration order.
    """
    found: set[Path] = set()
    for pattern in patterns:
        p = Path(pattern)
        if p.exists():
            found.add(p)
            continue
        root = Path(p.anchor) if p.is_absolute() else Path(".")
        pat = str(p.relative_to(p.anchor)) if p.is_absolute() else str(p)
        found.update(root.glob(pat))
    files = sorted(f for f in found if f.is_file())
    if not files:
        raise EmptyInputError(f"no input files match {list(patterns)!r}")
    return files


def load_table(path: Path, required: tuple[str, ...]) -> dict[str, list[str]]:
    """Parse one CSV file into per-column string lists.

    Raises ``SchemaError`` naming the first missing required column and
    ``EmptyInputError`` when the table has a header but no rows.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInputError(f"{path} is empty") from None
        rows = [row for row in reader if row]
    for name in required:
        if name not in header:
            raise SchemaError(f"{path} is missing column {name!r}")
    if not rows:
        raise EmptyInputError(f"{path} has no data rows")
    idx = {name: header.index(name) for name in header}
    return {name: [row[idx[name]] for row in rows] for name in header}


def load_sidecar(csv_path: Path) -> dict:
    """Return the JSON sidecar for a CSV artifact, or {} if there is none."""
    side = csv_path.with_suffix(".json")
    if not side.exists():
        return {}
    return json.loads(side.read_text(encoding="utf-8"))


def floats(table: dict[str, list[str]], name: str) -> list[float]:
    try:
        return [float(v) for v in table[name]]
    except ValueError as exc:
        raise SchemaError(f"column {name!r} holds a non-numeric value: {exc}") from None
