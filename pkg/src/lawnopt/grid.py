"""Antipodal point sets on the unit sphere.

A grid is a list of N unit vectors closed under the antipodal map
r -> -r, together with the index involution a(i) realizing that map.
All quadrature downstream assumes equal weights 1/N per site, with
mean site spacing h = sqrt(4*pi/N).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

# Cell size for the quantized-coordinate hash used to find antipodal
# partners without an O(N^2) scan.  Partners must then match exactly
# to PAIR_TOL.
QUANT = 1e-6
PAIR_TOL = 1e-9

# Norm policy on load: deviations beyond UNIT_HARD mean a corrupt file;
# deviations inside UNIT_SOFT are kept verbatim so that saving and
# reloading a grid is bit-exact.
UNIT_SOFT = 1e-12
UNIT_HARD = 1e-6


class GridError(ValueError):
    """Raised for malformed grid files or geometrically invalid point sets."""


def geodesic_angle(u, v) -> float:
    """Spherical angle between two unit vectors, in [0, pi].

    Uses the chord form 2*arcsin(|u - v|/2), which is accurate near 0;
    the arcsin argument is clamped against rounding.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    chord = float(np.linalg.norm(u - v))
    return 2.0 * math.asin(min(chord / 2.0, 1.0))


def geodesic_angles_to(points: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Vectorized geodesic_angle of each row of `points` against `v`."""
    chord = np.linalg.norm(points - v[None, :], axis=1)
    return 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))


@dataclass
class SphericalGrid:
    """Validated antipodal point set.

    points[a(i)] == -points[i] holds exactly at the bit level for
    generated grids and to PAIR_TOL for loaded ones.  The instance is
    treated as immutable after construction and is safe to share across
    threads.
    """

    points: np.ndarray          # (N, 3) float64, unit rows
    antipode: np.ndarray        # (N,) int64, fixed-point-free involution
    spacing_h: float            # sqrt(4*pi/N)
    source_tag: str = "unknown"

    # derived
    n_sites: int = field(init=False)
    content_hash: str = field(init=False)
    pair_rep: np.ndarray = field(init=False)     # (N/2,) representative site per pair
    pair_mate: np.ndarray = field(init=False)    # (N/2,) its antipodal partner
    site_pair: np.ndarray = field(init=False)    # (N,) pair index of each site
    colat: np.ndarray = field(init=False)        # (N,) arccos(z)
    azimuth: np.ndarray = field(init=False)      # (N,) atan2(y, x) in [0, 2*pi)

    def __post_init__(self):
        self.points = np.ascontiguousarray(self.points, dtype=np.float64)
        self.antipode = np.ascontiguousarray(self.antipode, dtype=np.int64)
        self.n_sites = self.points.shape[0]
        self.content_hash = hashlib.sha256(self.points.tobytes()).hexdigest()[:16]
        self._build_pairs()
        self.colat = np.arccos(np.clip(self.points[:, 2], -1.0, 1.0))
        az = np.arctan2(self.points[:, 1], self.points[:, 0])
        self.azimuth = np.where(az < 0.0, az + 2.0 * np.pi, az)
        # cached colatitude ordering for annulus queries (see kernel module)
        self._colat_order = np.argsort(self.colat, kind="stable")
        self._colat_sorted = self.colat[self._colat_order]

    def _build_pairs(self):
        n = self.n_sites
        seen = np.zeros(n, dtype=bool)
        reps, mates = [], []
        site_pair = np.empty(n, dtype=np.int64)
        for i in range(n):
            if seen[i]:
                continue
            j = int(self.antipode[i])
            # representative = lexicographically larger coordinate triple
            r, m = (i, j) if tuple(self.points[i]) > tuple(self.points[j]) else (j, i)
            k = len(reps)
            reps.append(r)
            mates.append(m)
            site_pair[i] = site_pair[j] = k
            seen[i] = seen[j] = True
        self.pair_rep = np.asarray(reps, dtype=np.int64)
        self.pair_mate = np.asarray(mates, dtype=np.int64)
        self.site_pair = site_pair

    @property
    def n_pairs(self) -> int:
        return self.n_sites // 2

    def is_pair_representative(self, i: int) -> bool:
        return bool(self.pair_rep[self.site_pair[i]] == i)

    def validate(self):
        """Check all grid invariants; raises GridError on the first violation."""
        n = self.n_sites
        if n % 2 != 0:
            raise GridError(f"grid has odd point count N={n}")
        norms = np.linalg.norm(self.points, axis=1)
        bad = np.argmax(np.abs(norms - 1.0))
        if abs(norms[bad] - 1.0) > UNIT_SOFT:
            raise GridError(f"point {bad} has non-unit norm {norms[bad]!r}")
        a = self.antipode
        if np.any(a[a] != np.arange(n)) or np.any(a == np.arange(n)):
            raise GridError("antipode map is not a fixed-point-free involution")
        resid = np.linalg.norm(self.points + self.points[a], axis=1)
        worst = int(np.argmax(resid))
        if resid[worst] >= PAIR_TOL:
            raise GridError(
                f"grid not antipodal: site {worst} has no partner within "
                f"{PAIR_TOL:g} (residual {resid[worst]:.3e})"
            )
        if abs(self.spacing_h**2 * n - 4.0 * np.pi) > 1e-12:
            raise GridError("spacing h does not satisfy h^2 * N = 4*pi")


def _pair_antipodes(points: np.ndarray) -> np.ndarray:
    """Find the antipodal partner of every point via a quantized-coordinate
    hash with 27-cell probing, then verify each match to PAIR_TOL."""
    n = points.shape[0]
    cells: dict[tuple[int, int, int], list[int]] = {}
    keys = np.floor(points / QUANT).astype(np.int64)
    for i in range(n):
        cells.setdefault((keys[i, 0], keys[i, 1], keys[i, 2]), []).append(i)

    anti = np.full(n, -1, dtype=np.int64)
    neg_keys = np.floor(-points / QUANT).astype(np.int64)
    offsets = [(dx, dy, dz) for dx in (0, -1, 1) for dy in (0, -1, 1) for dz in (0, -1, 1)]
    for i in range(n):
        if anti[i] >= 0:
            continue
        kx, ky, kz = neg_keys[i]
        partner = -1
        for dx, dy, dz in offsets:
            for j in cells.get((kx + dx, ky + dy, kz + dz), ()):
                if j != i and np.linalg.norm(points[i] + points[j]) < PAIR_TOL:
                    partner = j
                    break
            if partner >= 0:
                break
        if partner < 0:
            raise GridError(
                f"grid not antipodal: point {i} at {points[i].tolist()} "
                f"has no antipodal partner within {PAIR_TOL:g}"
            )
        if anti[partner] >= 0 and anti[partner] != i:
            raise GridError(f"grid not antipodal: points {i} and {anti[partner]} "
                            f"both pair with {partner}")
        anti[i] = partner
        anti[partner] = i
    return anti


def _normalize_rows(points: np.ndarray) -> np.ndarray:
    """Normalize rows to unit length, iterating to a bitwise fixed point so
    that a later conditional renormalization on load is a no-op."""
    pts = np.array(points, dtype=np.float64)
    for _ in range(4):
        norms = np.linalg.norm(pts, axis=1, keepdims=True)
        nxt = pts / norms
        if np.array_equal(nxt, pts):
            break
        pts = nxt
    return pts


def generate_fibonacci_antipodal(n_pairs: int) -> SphericalGrid:
    """Fibonacci-lattice points on the open upper hemisphere plus their exact
    antipodes.  N = 2*n_pairs; the pairing is exact by construction.

    z_k = (k + 1/2)/n_pairs is strictly positive, so no point sits on the
    equator and the hemisphere is genuinely open.
    """
    if n_pairs < 3:
        raise GridError(f"n_pairs must be >= 3, got {n_pairs}")
    k = np.arange(n_pairs, dtype=np.float64)
    z = (k + 0.5) / n_pairs
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    az = 2.0 * np.pi * np.mod(k / golden, 1.0)
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    upper = np.column_stack([rho * np.cos(az), rho * np.sin(az), z])
    upper = _normalize_rows(upper)
    points = np.vstack([upper, -upper])
    n = 2 * n_pairs
    antipode = np.concatenate([
        np.arange(n_pairs, dtype=np.int64) + n_pairs,
        np.arange(n_pairs, dtype=np.int64),
    ])
    grid = SphericalGrid(
        points=points,
        antipode=antipode,
        spacing_h=math.sqrt(4.0 * math.pi / n),
        source_tag="fibonacci-antipodal",
    )
    grid.validate()
    return grid


def load_grid(path) -> SphericalGrid:
    """Read a plain-text grid file: one `x y z` triple per line, `#` comments.

    Points whose norm deviates from 1 by more than UNIT_HARD are rejected as
    corrupt; smaller deviations are renormalized (and deviations inside
    UNIT_SOFT kept verbatim, so save/load round-trips are bit-exact).
    """
    rows = []
    source_tag = None
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                if stripped[1:].strip().startswith("source_tag:"):
                    source_tag = stripped[1:].split(":", 1)[1].strip()
                continue
            parts = stripped.split()
            if len(parts) != 3:
                raise GridError(f"{path}: line {lineno}: expected 3 coordinates, got {len(parts)}")
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise GridError(f"{path}: line {lineno}: {exc}") from None
    if len(rows) < 2:
        raise GridError(f"{path}: fewer than 2 points")
    if len(rows) % 2 != 0:
        raise GridError(f"{path}: odd number of points ({len(rows)}); grid not antipodal")

    points = np.asarray(rows, dtype=np.float64)
    norms = np.linalg.norm(points, axis=1)
    worst = int(np.argmax(np.abs(norms - 1.0)))
    if abs(norms[worst] - 1.0) > UNIT_HARD:
        raise GridError(
            f"{path}: point {worst} norm {norms[worst]!r} deviates from 1 by more "
            f"than {UNIT_HARD:g}; refusing to silently fix a corrupt file"
        )
    fix = np.abs(norms - 1.0) > UNIT_SOFT
    if np.any(fix):
        points[fix] /= norms[fix, None]

    antipode = _pair_antipodes(points)
    n = points.shape[0]
    grid = SphericalGrid(
        points=points,
        antipode=antipode,
        spacing_h=math.sqrt(4.0 * math.pi / n),
        source_tag=source_tag if source_tag else "file",
    )
    grid.validate()
    return grid


def save_grid(grid: SphericalGrid, path):
    """Write the plain-text grid format understood by load_grid.

    Coordinates use shortest round-trip decimal repr, so load(save(g))
    reproduces g bit-for-bit.
    """
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# source_tag: {grid.source_tag}\n")
        for p in grid.points:
            fh.write(f"{float(p[0])!r} {float(p[1])!r} {float(p[2])!r}\n")
