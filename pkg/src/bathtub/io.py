"""CSV and manifest plumbing shared by every module.

Numbers are written with 12 significant digits and LF line endings. Every
file type has a fixed header, listed in ``SCHEMAS``; ``check_csv_schema``
validates an emitted file against it.
"""

from __future__ import annotations

import csv
import hashlib
import math
from pathlib import Path
from typing import Iterable, Sequence

from bathtub.errors import ConfigurationError

SCHEMAS: dict[str, tuple[tuple[str, ...], ...]] = {
    "trace": (("t", "k0"),),
    "field": (("t", "x", "k"),),
    "mass": (("t", "delta", "xi"),),
    "reconstruction": (("t", "xi", "delta", "f_hat"), ("t", "xi", "delta", "f_hat", "f_true_mean")),
    "recovery": (("x", "phi_hat"), ("x", "phi_hat", "phi_true")),
    "study": (("abscissa", "error"),),
}


def fmt(value) -> str:
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return ""
    return f"{value:.12g}"


def write_csv(path, header: Sequence[str], columns: Sequence[Sequence]) -> int:
    """Write equal-length (or trailing-short) columns; returns the row count.

    Columns shorter than the longest one are padded with empty cells.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = max(len(c) for c in columns)
    with path.open("w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(rows):
            fh.write(",".join(fmt(c[i]) if i < len(c) else "" for c in columns) + "\n")
    return rows


def read_csv(path) -> tuple[list[str], list[list[float | None]]]:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigurationError(f"{path}: empty CSV", line=1, column=1) from None
        columns: list[list[float | None]] = [[] for _ in header]
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ConfigurationError(f"{path}: expected {len(header)} fields", line=lineno, column=1)
            for j, cell in enumerate(row):
                if cell == "":
                    columns[j].append(None)
                    continue
                try:
                    columns[j].append(float(cell))
                except ValueError:
                    raise ConfigurationError(f"{path}: not a number {cell!r}", line=lineno, column=j + 1) from None
    return header, columns


def check_csv_schema(path, kind: str | None = None) -> str:
    """Validate header and numeric content; returns the matched schema kind."""
    header, columns = read_csv(path)
    candidates = [kind] if kind else list(SCHEMAS)
    for name in candidates:
        if tuple(header) in SCHEMAS[name]:
            for col_name, col in zip(header, columns):
                if col_name in ("t", "x", "abscissa") and any(v is None for v in col):
                    raise ConfigurationError(f"{path}: missing values in column {col_name}")
            return name
    raise ConfigurationError(f"{path}: header {header} matches no known schema")


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def data_rows(path) -> int:
    """Data rows below the header for CSV files, plain line count otherwise."""
    path = Path(path)
    with path.open() as fh:
        lines = sum(1 for _ in fh)
    return max(lines - 1, 0) if path.suffix == ".csv" else lines


def write_manifest(directory, artifacts: Iterable[str], name: str = "manifest.csv") -> Path:
    """One line per artifact: ``relative-path,sha256,rows``."""
    directory = Path(directory)
    lines = []
    for rel in sorted(artifacts):
        p = directory / rel
        lines.append(f"{rel},{sha256(p)},{data_rows(p)}\n")
    out = directory / name
    out.write_text("".join(lines))
    return out


def read_manifest(path) -> list[tuple[str, str, int]]:
    out = []
    for line in Path(path).read_text().splitlines():
        rel, digest, rows = line.split(",")
        out.append((rel, digest, int(rows)))
    return out
