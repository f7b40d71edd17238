"""Discrete delta kernels and fixed-jump-angle interaction tables.

For a grid with spacing h and a jump angle theta, the table stores every
ordered site pair (i, j) whose spherical angle theta_ij falls inside the
kernel support |theta_ij - theta| < w*h, with weight phi((theta_ij - theta)/h).
Self pairs and antipodal pairs are never stored: for any admissible theta the
support annulus excludes both the angle 0 and the angle pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix

from .grid import SphericalGrid, geodesic_angles_to

KERNEL_SHAPES = ("cosine", "triangle")


class ResolutionError(ValueError):
    """Jump angle cannot be resolved on the given grid."""


class GridMismatchError(ValueError):
    """Lawn, table, or config built on different grids."""


@dataclass(frozen=True)
class DeltaKernel:
    """Even, nonnegative, compactly supported unit-mass bump phi.

    half_width is in units of h; support is |x| <= half_width.  The default
    is the cosine bump phi(x) = (1/4)(1 + cos(pi x / 2)) on |x| <= 2.
    """

    half_width: float = 2.0
    shape: str = "cosine"

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        if self.shape not in KERNEL_SHAPES:
            raise ValueError(f"unknown kernel shape {self.shape!r}; choose from {KERNEL_SHAPES}")

    def phi(self, x) -> np.ndarray | float:
        """Kernel value(s); accepts scalars or arrays."""
        x = np.asarray(x, dtype=np.float64)
        w = self.half_width
        inside = np.abs(x) < w
        if self.shape == "cosine":
            val = (1.0 / (2.0 * w)) * (1.0 + np.cos(np.pi * x / w))
        else:  # triangle
            val = (1.0 - np.abs(x) / w) / w
        out = np.where(inside, val, 0.0)
        return float(out) if out.ndim == 0 else out

    def integral_error(self, n_panels: int = 1_000_000) -> float:
        """|trapezoid-rule integral of phi - 1| over the support."""
        xs = np.linspace(-self.half_width, self.half_width, n_panels + 1)
        total = np.trapezoid(self.phi(xs), xs) if hasattr(np, "trapezoid") else np.trapz(self.phi(xs), xs)
        return abs(float(total) - 1.0)


DEFAULT_KERNEL = DeltaKernel()


def phi(x):
    """Default delta kernel: (1/4)(1 + cos(pi x / 2)) for |x| <= 2, else 0."""
    return DEFAULT_KERNEL.phi(x)


def admissible_theta_range(grid: SphericalGrid, kernel: DeltaKernel = DEFAULT_KERNEL):
    """Smallest and largest jump angle resolvable on this grid.

    theta_min keeps the kernel annulus clear of 0 and pi with a margin of at
    least one full support width: max(4h, 2*w*h, 0.01).  At the default
    half-width 2 this is max(4h, 0.01).
    """
    h = grid.spacing_h
    tmin = max(4.0 * h, 2.0 * kernel.half_width * h, 0.01)
    return tmin, math.pi - tmin


@dataclass
class InteractionTable:
    """CSR table of kernel-weighted pairs at a fixed jump angle.

    Both orientations of every unordered pair are stored, matching the free
    double sum used by the probability evaluators.  Immutable after build and
    safe to share across annealing replicas.
    """

    theta: float
    indptr: np.ndarray       # (N+1,) int64
    indices: np.ndarray      # (nnz,) int64
    weights: np.ndarray      # (nnz,) float64, all > 0
    prefactor: float         # 4 / (sin(theta) * N^2 * h)
    grid_hash: str
    n_sites: int
    spacing_h: float
    kernel: DeltaKernel = DEFAULT_KERNEL

    matrix: csr_matrix = field(init=False, repr=False)

    def __post_init__(self):
        self.indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        self.matrix = csr_matrix(
            (self.weights, self.indices, self.indptr),
            shape=(self.n_sites, self.n_sites),
            copy=False,
        )

    @property
    def n_stored(self) -> int:
        return int(self.indices.shape[0])

    def neighbors(self, i: int):
        """(indices, weights) slice for site i; read-only views."""
        a, b = self.indptr[i], self.indptr[i + 1]
        return self.indices[a:b], self.weights[a:b]

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def check_built_for(self, grid: SphericalGrid):
        if grid.content_hash != self.grid_hash:
            raise GridMismatchError(
                f"table built for grid {self.grid_hash}, got grid {grid.content_hash}"
            )


def _annulus_colat_interval(c: float, t_lo: float, t_hi: float):
    """Colatitude interval containing every point at geodesic distance in
    [t_lo, t_hi] from a site at colatitude c."""
    lo = max(0.0, t_lo - c, c - t_hi)
    south = math.pi - c
    hi = math.pi - max(0.0, t_lo - south, south - t_hi)
    return lo, hi


def _filter_pairs(grid, i, cand, theta, kernel):
    """Exact-angle filter of candidate partners for site i; returns
    (indices, weights) with self and antipodal entries dropped."""
    ang = geodesic_angles_to(grid.points[cand], grid.points[i])
    x = (ang - theta) / grid.spacing_h
    w = kernel.phi(x)
    keep = (w > 0.0) & (cand != i) & (cand != grid.antipode[i])
    return cand[keep], w[keep]


def build_interaction(
    grid: SphericalGrid,
    theta: float,
    kernel: DeltaKernel = DEFAULT_KERNEL,
    *,
    method: str = "binned",
    check_resolution: bool = True,
) -> InteractionTable:
    """Precompute the kernel-weighted pair table for jump angle theta.

    method="binned" prunes candidates by the colatitude interval of the
    kernel annulus (latitude binning with exact-angle filtering);
    method="brute" scans all N^2 pairs and exists as an independent oracle.
    Both produce identical tables.

    check_resolution=False skips the admissible-angle precondition; intended
    for tiny hand-checkable grids like the octahedron, where every angle is
    under-resolved.
    """
    if check_resolution:
        tmin, tmax = admissible_theta_range(grid, kernel)
        if not (tmin <= theta <= tmax):
            raise ResolutionError(
                f"jump angle unresolved by grid: theta={theta:.6g} outside "
                f"[{tmin:.6g}, {tmax:.6g}] for N={grid.n_sites}"
            )
    elif not (0.0 < theta < math.pi):
        raise ResolutionError(f"jump angle {theta:.6g} outside (0, pi)")

    if method not in ("binned", "brute"):
        raise ValueError(f"unknown build method {method!r}")

    n = grid.n_sites
    h = grid.spacing_h
    wh = kernel.half_width * h
    t_lo, t_hi = theta - wh, theta + wh

    idx_lists = []
    wt_lists = []
    counts = np.zeros(n, dtype=np.int64)
    if method == "brute":
        all_sites = np.arange(n, dtype=np.int64)
        for i in range(n):
            cand_idx, cand_w = _filter_pairs(grid, i, all_sites, theta, kernel)
            counts[i] = cand_idx.shape[0]
            idx_lists.append(cand_idx)
            wt_lists.append(cand_w)
    else:
        order = grid._colat_order
        colat_sorted = grid._colat_sorted
        guard = 1e-12
        for i in range(n):
            lo, hi = _annulus_colat_interval(float(grid.colat[i]), t_lo, t_hi)
            a = np.searchsorted(colat_sorted, lo - guard, side="left")
            b = np.searchsorted(colat_sorted, hi + guard, side="right")
            cand_idx, cand_w = _filter_pairs(grid, i, order[a:b], theta, kernel)
            srt = np.argsort(cand_idx, kind="stable")
            counts[i] = cand_idx.shape[0]
            idx_lists.append(cand_idx[srt])
            wt_lists.append(cand_w[srt])

    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = np.concatenate(idx_lists) if idx_lists else np.empty(0, dtype=np.int64)
    weights = np.concatenate(wt_lists) if wt_lists else np.empty(0, dtype=np.float64)

    return InteractionTable(
        theta=float(theta),
        indptr=indptr,
        indices=indices,
        weights=weights,
        prefactor=4.0 / (math.sin(theta) * n * n * h),
        grid_hash=grid.content_hash,
        n_sites=n,
        spacing_h=h,
        kernel=kernel,
    )


# --- optional on-disk cache (internal, versioned) ---

_CACHE_VERSION = 1


def table_cache_key(grid_hash: str, theta: float, kernel: DeltaKernel) -> str:
    return f"table_{grid_hash}_{theta:.17g}_{kernel.shape}_{kernel.half_width:.17g}.npz"


def save_table(table: InteractionTable, path):
    np.savez_compressed(
        path,
        version=np.int64(_CACHE_VERSION),
        theta=np.float64(table.theta),
        indptr=table.indptr,
        indices=table.indices,
        weights=table.weights,
        prefactor=np.float64(table.prefactor),
        grid_hash=np.bytes_(table.grid_hash.encode()),
        n_sites=np.int64(table.n_sites),
        spacing_h=np.float64(table.spacing_h),
        kernel_half_width=np.float64(table.kernel.half_width),
        kernel_shape=np.bytes_(table.kernel.shape.encode()),
    )


def load_table(path) -> InteractionTable:
    with np.load(path) as z:
        if int(z["version"]) != _CACHE_VERSION:
            raise ValueError(f"{path}: unsupported table cache version {int(z['version'])}")
        kernel = DeltaKernel(
            half_width=float(z["kernel_half_width"]),
            shape=bytes(z["kernel_shape"]).decode(),
        )
        return InteractionTable(
            theta=float(z["theta"]),
            indptr=z["indptr"],
            indices=z["indices"],
            weights=z["weights"],
            prefactor=float(z["prefactor"]),
            grid_hash=bytes(z["grid_hash"]).decode(),
            n_sites=int(z["n_sites"]),
            spacing_h=float(z["spacing_h"]),
            kernel=kernel,
        )
