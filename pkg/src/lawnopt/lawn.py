"""Antipodal lawn colorings and success-probability evaluation.

A lawn assigns one bit per site with the antipodal constraint
s_i + s_{a(i)} = 1, so exactly half the sphere is covered.  The success
probability of a jump of angle theta is the kernel-weighted double sum
over ordered site pairs

    P = 4/(sin(theta) N^2 h) * sum_{i,j} f(s_i, s_j) w_ij

with f = s_i s_j for the one-lawn (complementary) setup and
f = s1_i (1 - s2_j) for the two-lawn (independent) setup.

Lawn file format (JSON):
    {"grid": {"source_tag", "N", "content_hash"},
     "theta": radians,
     "setup": "one" | "two",
     "bits": [rle, ...]    # one run-length string per lawn, site order,
                           # runs "bit:count" joined by commas
     "probability": best known P}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .grid import SphericalGrid
from .kernel import GridMismatchError, InteractionTable


@dataclass
class Lawn:
    """Binary site coloring with the antipodal constraint baked in.

    Mutable single-owner state: toggles via apply_pair_toggle keep the
    invariants; evaluation against a shared InteractionTable is read-only.
    """

    grid: SphericalGrid
    bits: np.ndarray  # (N,) uint8 in {0, 1}

    def __post_init__(self):
        self.bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if self.bits.shape != (self.grid.n_sites,):
            raise ValueError(
                f"bits shape {self.bits.shape} does not match grid N={self.grid.n_sites}"
            )
        self.check()

    def check(self):
        """Assert the antipodal constraint (and hence sum = N/2)."""
        paired = self.bits + self.bits[self.grid.antipode]
        if not np.all(paired == 1):
            bad = int(np.argmin(paired == 1))
            raise ValueError(f"antipodal constraint violated at site {bad}")

    def copy(self) -> "Lawn":
        return Lawn(self.grid, self.bits.copy())

    @property
    def coverage(self) -> int:
        return int(self.bits.sum())

    def lawn_sites(self) -> np.ndarray:
        return np.nonzero(self.bits)[0]


@dataclass
class TwoLawnConfig:
    """Two independent antipodal lawns on the same grid."""

    lawn1: Lawn
    lawn2: Lawn

    def __post_init__(self):
        if self.lawn1.grid.content_hash != self.lawn2.grid.content_hash:
            raise GridMismatchError("two-lawn config mixes different grids")

    @property
    def grid(self) -> SphericalGrid:
        return self.lawn1.grid

    def copy(self) -> "TwoLawnConfig":
        return TwoLawnConfig(self.lawn1.copy(), self.lawn2.copy())


def _lawn_from_rep_bits(grid: SphericalGrid, rep_bits: np.ndarray) -> Lawn:
    bits = np.empty(grid.n_sites, dtype=np.uint8)
    bits[grid.pair_rep] = rep_bits
    bits[grid.pair_mate] = 1 - rep_bits
    return Lawn(grid, bits)


def hemisphere_lawn(grid: SphericalGrid, axis=(0.0, 0.0, 1.0)) -> Lawn:
    """Half-space coloring: s_i = 1 iff point[i] . axis > 0.

    Sites exactly on the boundary great circle take s=1 on the pair
    representative, keeping the result deterministic and antipodal.
    """
    axis = np.asarray(axis, dtype=np.float64)
    norm = np.linalg.norm(axis)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"axis must be unit length, |axis| = {norm!r}")
    dots = grid.points @ axis
    bits = (dots > 0.0).astype(np.uint8)
    ties = np.nonzero(dots == 0.0)[0]
    for i in ties:
        bits[i] = 1 if grid.is_pair_representative(int(i)) else 0
    lawn = Lawn(grid, bits)
    return lawn


def cogwheel_lawn(
    grid: SphericalGrid,
    n_cogs: int,
    cog_fraction: float = 0.5,
    phase: float = 0.0,
) -> Lawn:
    """Hemisphere whose boundary is modulated by n_cogs square teeth.

    s = 1 iff colatitude < pi/2 + A(azimuth), where A alternates between
    +depth and -depth on 2*n_cogs longitude sectors of width pi/n_cogs,
    depth = cog_fraction * pi/4.  Odd n_cogs makes A(az + pi) = -A(az), so
    the pattern is antipodally consistent; bits are assigned per pair
    representative (boundary ties take s=1 there) and complemented on the
    partner.  cog_fraction = 0 reduces to hemisphere_lawn about +z.
    """
    if n_cogs < 1 or n_cogs % 2 == 0:
        raise ValueError(f"n_cogs must be odd and positive, got {n_cogs}")
    if not 0.0 <= cog_fraction <= 1.0:
        raise ValueError(f"cog_fraction must be in [0, 1], got {cog_fraction}")
    depth = cog_fraction * (math.pi / 4.0)
    sector = math.pi / n_cogs

    rep = grid.pair_rep
    lam = np.mod(grid.azimuth[rep] - phase, 2.0 * math.pi)
    k = np.floor(lam / sector).astype(np.int64)
    k = np.minimum(k, 2 * n_cogs - 1)  # guard against mod rounding to 2*pi
    amp = np.where(k % 2 == 0, depth, -depth)
    rep_bits = (grid.colat[rep] <= math.pi / 2.0 + amp).astype(np.uint8)
    return _lawn_from_rep_bits(grid, rep_bits)


def random_lawn(grid: SphericalGrid, rng_seed: int) -> Lawn:
    """Uniform random member of each antipodal pair; deterministic per seed."""
    rng = np.random.Generator(np.random.Philox(key=rng_seed))
    rep_bits = rng.integers(0, 2, size=grid.n_pairs, dtype=np.uint8)
    return _lawn_from_rep_bits(grid, rep_bits)


def complement(lawn: Lawn) -> Lawn:
    """Flip every bit; the result is again a valid antipodal lawn."""
    return Lawn(lawn.grid, 1 - lawn.bits)


def _check_match(table: InteractionTable, *lawns: Lawn):
    for lawn in lawns:
        table.check_built_for(lawn.grid)


def success_probability_one(lawn: Lawn, table: InteractionTable) -> float:
    """prefactor * sum_{i,j} s_i s_j w_ij over ordered stored pairs."""
    _check_match(table, lawn)
    s = lawn.bits.astype(np.float64)
    ws = table.matrix @ s
    return table.prefactor * float((s * ws).sum())


def success_probability_two(config: TwoLawnConfig, table: InteractionTable) -> float:
    """prefactor * sum_{i,j} s1_i (1 - s2_j) w_ij over ordered stored pairs."""
    _check_match(table, config.lawn1, config.lawn2)
    s1 = config.lawn1.bits.astype(np.float64)
    t2 = 1.0 - config.lawn2.bits.astype(np.float64)
    return table.prefactor * float((s1 * (table.matrix @ t2)).sum())


def _row_dot(table: InteractionTable, i: int, vec: np.ndarray) -> float:
    idx, w = table.neighbors(i)
    return float((w * vec[idx]).sum())


def delta_pair_toggle(state, table: InteractionTable, which_lawn: int, pair_index: int) -> float:
    """Exact P(after) - P(before) for toggling the pair of site `pair_index`
    in the chosen lawn, without mutating state.

    Uses only the neighbor lists of the site and its antipode.  Cross terms
    vanish because the table never stores self or antipodal pairs, so the
    deltas are exact to floating-point rounding.
    """
    i = int(pair_index)
    if isinstance(state, Lawn):
        if which_lawn != 1:
            raise ValueError("one-lawn state has only lawn 1")
        lawn1, lawn2 = state, None
    else:
        if which_lawn not in (1, 2):
            raise ValueError(f"which_lawn must be 1 or 2, got {which_lawn}")
        lawn1, lawn2 = state.lawn1, state.lawn2
    grid = lawn1.grid
    if not 0 <= i < grid.n_sites:
        raise IndexError(f"site index {i} out of range for N={grid.n_sites}")
    m = int(grid.antipode[i])

    if lawn2 is None:
        s = lawn1.bits.astype(np.float64)
        delta = 1.0 - 2.0 * s[i]
        return table.prefactor * 2.0 * delta * (_row_dot(table, i, s) - _row_dot(table, m, s))
    if which_lawn == 1:
        t2 = 1.0 - lawn2.bits.astype(np.float64)
        delta = 1.0 - 2.0 * float(lawn1.bits[i])
        return table.prefactor * delta * (_row_dot(table, i, t2) - _row_dot(table, m, t2))
    s1 = lawn1.bits.astype(np.float64)
    delta = 1.0 - 2.0 * float(lawn2.bits[i])
    return -table.prefactor * delta * (_row_dot(table, i, s1) - _row_dot(table, m, s1))


def apply_pair_toggle(state, which_lawn: int, pair_index: int):
    """Swap s_i and s_{a(i)} in the chosen lawn, in place; returns state."""
    i = int(pair_index)
    if isinstance(state, Lawn):
        if which_lawn != 1:
            raise ValueError("one-lawn state has only lawn 1")
        lawn = state
    else:
        if which_lawn not in (1, 2):
            raise ValueError(f"which_lawn must be 1 or 2, got {which_lawn}")
        lawn = state.lawn1 if which_lawn == 1 else state.lawn2
    grid = lawn.grid
    if not 0 <= i < grid.n_sites:
        raise IndexError(f"site index {i} out of range for N={grid.n_sites}")
    m = int(grid.antipode[i])
    lawn.bits[i] ^= 1
    lawn.bits[m] ^= 1
    return state


# --- lawn file I/O ---


def _rle_encode(bits: np.ndarray) -> str:
    edges = np.nonzero(np.diff(bits))[0] + 1
    starts = np.concatenate([[0], edges])
    ends = np.concatenate([edges, [bits.shape[0]]])
    return ",".join(f"{int(bits[a])}:{int(b - a)}" for a, b in zip(starts, ends))


def _rle_decode(text: str, n: int) -> np.ndarray:
    bits = np.empty(n, dtype=np.uint8)
    pos = 0
    for run in text.split(","):
        try:
            bit, count = run.split(":")
            bit, count = int(bit), int(count)
        except ValueError:
            raise ValueError(f"malformed run {run!r} in lawn bits") from None
        if bit not in (0, 1) or count <= 0 or pos + count > n:
            raise ValueError(f"invalid run {run!r} in lawn bits")
        bits[pos:pos + count] = bit
        pos += count
    if pos != n:
        raise ValueError(f"lawn bits decode to {pos} sites, expected {n}")
    return bits


def save_lawn(state, theta: float, probability: float, path):
    """Write a Lawn or TwoLawnConfig in the documented JSON format."""
    if isinstance(state, Lawn):
        setup, lawns = "one", [state]
    else:
        setup, lawns = "two", [state.lawn1, state.lawn2]
    grid = lawns[0].grid
    doc = {
        "grid": {
            "source_tag": grid.source_tag,
            "N": grid.n_sites,
            "content_hash": grid.content_hash,
        },
        "theta": float(theta),
        "setup": setup,
        "bits": [_rle_encode(lawn.bits) for lawn in lawns],
        "probability": float(probability),
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_lawn(path, grid: SphericalGrid):
    """Read a lawn file; returns (state, theta, probability).

    The file's grid fingerprint must match `grid` exactly.
    """
    with open(path, "r", encoding="ascii") as fh:
        doc = json.load(fh)
    meta = doc["grid"]
    if int(meta["N"]) != grid.n_sites or meta["content_hash"] != grid.content_hash:
        raise GridMismatchError(
            f"lawn file {path} was written for grid {meta['content_hash']} "
            f"(N={meta['N']}), got grid {grid.content_hash} (N={grid.n_sites})"
        )
    setup = doc["setup"]
    rles = doc["bits"]
    if setup == "one":
        if len(rles) != 1:
            raise ValueError(f"{path}: one-lawn file must hold exactly one bit string")
        state = Lawn(grid, _rle_decode(rles[0], grid.n_sites))
    elif setup == "two":
        if len(rles) != 2:
            raise ValueError(f"{path}: two-lawn file must hold exactly two bit strings")
        state = TwoLawnConfig(
            Lawn(grid, _rle_decode(rles[0], grid.n_sites)),
            Lawn(grid, _rle_decode(rles[1], grid.n_sites)),
        )
    else:
        raise ValueError(f"{path}: unknown setup {setup!r}")
    return state, float(doc["theta"]), float(doc["probability"])
