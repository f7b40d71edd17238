"""Readers for the optimizer's data files: grid text, lawn JSON, and
sweep CSV.

These parsers are intentionally independent of the optimizer package;
the file formats are the only contract. Parsing is strict and raises
FormatError rather than guessing at malformed input.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np


class FormatError(ValueError):
    """Input file does not follow the documented format."""


SWEEP_COLUMNS = ("theta", "p_one", "p_two", "q", "hemisphere",
                 "gap_one", "gap_two", "n_cogs_one", "n_cogs_two", "seed")


def read_grid(path) -> np.ndarray:
    """Site positions from the grid text format: one `x y z` triple per
    line, `#` lines are comments."""
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 3:
                raise FormatError(
                    f"{path}: line {lineno}: expected 3 coordinates, got {len(parts)}")
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise FormatError(f"{path}: line {lineno}: non-numeric coordinate") from None
    if not rows:
        raise FormatError(f"{path}: no sites")
    return np.asarray(rows, dtype=np.float64)


def rle_decode(text: str, n: int) -> np.ndarray:
    """Decode a `bit:count,bit:count,...` run string into n site bits."""
    bits = np.empty(n, dtype=np.uint8)
    pos = 0
    for run in text.split(","):
        try:
            bit, count = run.split(":")
            bit, count = int(bit), int(count)
        except ValueError:
            raise FormatError(f"malformed run {run!r} in lawn bits") from None
        if bit not in (0, 1) or count <= 0 or pos + count > n:
            raise FormatError(f"invalid run {run!r} in lawn bits")
        bits[pos:pos + count] = bit
        pos += count
    if pos != n:
        raise FormatError(f"lawn bits decode to {pos} sites, expected {n}")
    return bits


@dataclass
class LawnFile:
    """Parsed lawn JSON: one or two bit arrays over n_sites grid sites."""

    setup: str
    bits: list[np.ndarray]
    theta: float
    probability: float | None
    n_sites: int


def read_lawn(path) -> LawnFile:
    try:
        with open(path, "r", encoding="ascii") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON: {exc}") from None
    try:
        n = int(doc["grid"]["N"])
        setup = doc["setup"]
        theta = float(doc["theta"])
        runs = doc["bits"]
    except (KeyError, TypeError):
        raise FormatError(f"{path}: missing lawn file key") from None
    expected = {"one": 1, "two": 2}.get(setup)
    if expected is None:
        raise FormatError(f"{path}: setup must be 'one' or 'two', got {setup!r}")
    if not isinstance(runs, list) or len(runs) != expected:
        raise FormatError(f"{path}: {setup}-lawn file must hold {expected} bit string(s)")
    probability = doc.get("probability")
    return LawnFile(
        setup=setup,
        bits=[rle_decode(r, n) for r in runs],
        theta=theta,
        probability=None if probability is None else float(probability),
        n_sites=n,
    )


def read_sweep(path) -> dict[str, np.ndarray]:
    """Columns of a sweep CSV as float arrays, keyed by header name."""
    with open(path, "r", newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(SWEEP_COLUMNS):
            raise FormatError(f"{path}: expected header {','.join(SWEEP_COLUMNS)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(SWEEP_COLUMNS):
                raise FormatError(f"{path}: line {lineno}: wrong column count")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise FormatError(f"{path}: line {lineno}: non-numeric value") from None
    if not rows:
        raise FormatError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=np.float64)
    return {name: data[:, k] for k, name in enumerate(SWEEP_COLUMNS)}
