"""Jump-angle sweeps, quantum comparison curves, and lawn diagnostics.

Sweep CSV format (12 significant digits, radians):
    theta,p_one,p_two,q,hemisphere,gap_one,gap_two,n_cogs_one,n_cogs_two,seed
Setups that were not run appear as nan probabilities with cog count 0.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, fields
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .anneal import AnnealSchedule, replica_search
from .grid import SphericalGrid
from .kernel import DEFAULT_KERNEL, DeltaKernel, build_interaction
from .lawn import (
    Lawn,
    TwoLawnConfig,
    cogwheel_lawn,
    complement,
    hemisphere_lawn,
    random_lawn,
    save_lawn,
    success_probability_two,
)

# Dominant-harmonic power fraction below which a lawn is classified as
# having no coherent cog structure (labyrinths, stripes, hemispheres).
COG_CONFIDENCE_THRESHOLD = 0.35

# Highest azimuthal harmonic considered when counting cogs.
MAX_HARMONIC = 41

_CSV_HEADER = "theta,p_one,p_two,q,hemisphere,gap_one,gap_two,n_cogs_one,n_cogs_two,seed"


def quantum_probability(theta: float) -> float:
    """Singlet anticorrelation probability cos^2(theta/2)."""
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    return math.cos(theta / 2.0) ** 2


def hemisphere_probability(theta: float) -> float:
    """Classical hemispherical-lawn success probability 1 - theta/pi."""
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    return 1.0 - theta / math.pi


def gap_maximizer_landmark() -> float:
    """The theta maximizing quantum - hemisphere: arcsin(2/pi).

    Stationarity: d/dtheta [cos^2(theta/2) - 1 + theta/pi] = 0 reduces to
    sin(theta) = 2/pi.
    """
    return math.asin(2.0 / math.pi)


class SpecialAngle(NamedTuple):
    q: int
    theta: float
    one_lawn_hemisphere_optimal: bool
    two_lawn_hemisphere_optimal: bool


def special_angles(q_max: int) -> list[SpecialAngle]:
    """Angles theta_q = pi/q for q = 2..q_max, flagged by whether the
    hemisphere is optimal there (one-lawn: all q; two-lawn: even q only)."""
    if q_max < 2:
        raise ValueError(f"q_max must be >= 2, got {q_max}")
    return [
        SpecialAngle(q, math.pi / q, True, q % 2 == 0)
        for q in range(2, q_max + 1)
    ]


def predicted_cogs(theta: float, setup: str, mode: int = 1) -> int:
    """Expected cog count: nearest odd integer to mode * 2pi/theta for the
    one-lawn setup, mode * pi/theta for two-lawn; ties round upward."""
    if setup not in ("one", "two"):
        raise ValueError(f"setup must be 'one' or 'two', got {setup!r}")
    if mode < 1:
        raise ValueError(f"mode must be a positive integer, got {mode}")
    if not 0.0 < theta < math.pi:
        raise ValueError(f"theta must lie in (0, pi), got {theta}")
    x = mode * (2.0 * math.pi if setup == "one" else math.pi) / theta
    lo = 2 * math.floor((x - 1.0) / 2.0) + 1  # largest odd <= x (or x-1 on odd x)
    hi = lo + 2
    if x - lo >= hi - x:
        return int(hi)
    return int(max(lo, 1))


def _symmetry_axis(border_points: np.ndarray, lawn_points: np.ndarray) -> np.ndarray:
    """Axis of approximate rotational symmetry of a lawn.

    Estimated from the second-moment tensor of the boundary band, which
    forms a near-great-circle ring whose normal is the most isolated
    eigenvalue's eigenvector.  (The moment tensor of the lawn sites
    themselves is useless here: p p^T is even under p -> -p, so for any
    antipodal lawn it equals half the full-grid moment regardless of the
    coloring.)  The sign is oriented along the lawn's mean vector.
    """
    moment = border_points.T @ border_points / border_points.shape[0]
    evals, evecs = np.linalg.eigh(moment)
    # eigh returns ascending eigenvalues; a ring has the isolated small one
    axis = evecs[:, 0] if evals[1] - evals[0] >= evals[2] - evals[1] else evecs[:, 2]
    mean = lawn_points.mean(axis=0)
    if float(mean @ axis) < 0.0:
        axis = -axis
    return axis


def _aligned_frame(axis: np.ndarray):
    ref = np.array([0.0, 0.0, 1.0])
    if abs(float(axis @ ref)) > 0.9:
        ref = np.array([1.0, 0.0, 0.0])
    e1 = np.cross(ref, axis)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    return e1, e2


def boundary_sites(lawn: Lawn) -> np.ndarray:
    """Sites whose neighborhood within geodesic radius 2h contains both
    colors; the extraction is mesh-free and antipodally closed."""
    grid = lawn.grid
    tree = cKDTree(grid.points)
    chord = 2.0 * math.sin(grid.spacing_h)  # chord length of geodesic 2h
    pairs = tree.query_pairs(chord, output_type="ndarray")
    mask = np.zeros(grid.n_sites, dtype=bool)
    if pairs.size:
        differs = lawn.bits[pairs[:, 0]] != lawn.bits[pairs[:, 1]]
        mask[pairs[differs, 0]] = True
        mask[pairs[differs, 1]] = True
    return np.nonzero(mask)[0]


def count_cogs(lawn: Lawn) -> tuple[int, float]:
    """Dominant odd azimuthal harmonic of the lawn boundary.

    Extracts the boundary band, aligns a symmetry axis from its
    second-moment tensor, and Fourier-analyzes the colatitude deviation of
    boundary sites around the equator of that frame.  Returns
    (n_cogs, confidence) where confidence is the dominant harmonic's share
    of the odd-harmonic power.  Returns (0, 0.0) when no cog structure is
    detectable: boundary too small or space-filling (random lawns,
    labyrinths), or no harmonic above the grid noise floor amplitude h/2.
    """
    grid = lawn.grid
    border = boundary_sites(lawn)
    if border.shape[0] < 8 or border.shape[0] > 0.8 * grid.n_sites:
        return 0, 0.0
    axis = _symmetry_axis(grid.points[border], grid.points[lawn.bits == 1])
    e1, e2 = _aligned_frame(axis)
    pts = grid.points[border]
    dev = np.arccos(np.clip(pts @ axis, -1.0, 1.0)) - math.pi / 2.0
    az = np.arctan2(pts @ e2, pts @ e1)

    ks = np.arange(1, MAX_HARMONIC + 1, 2)
    coeffs = (np.exp(-1j * np.outer(ks, az)) @ dev) / border.shape[0]
    power = np.abs(coeffs) ** 2
    top = int(np.argmax(power))
    amplitude = 2.0 * float(np.abs(coeffs[top]))
    if amplitude < grid.spacing_h / 2.0:
        return 0, 0.0
    confidence = float(power[top] / power.sum())
    return int(ks[top]), confidence


def classified_cogs(lawn: Lawn) -> int:
    """count_cogs with the confidence threshold applied: 0 if the lawn has
    no coherent cog structure."""
    n, conf = count_cogs(lawn)
    return n if conf >= COG_CONFIDENCE_THRESHOLD else 0


class ReflectionReport(NamedTuple):
    theta: float
    p_at_theta: float
    p_reflected: float
    difference: float


def verify_reflection_symmetry(config: TwoLawnConfig, theta: float,
                               kernel: DeltaKernel = DEFAULT_KERNEL) -> ReflectionReport:
    """Evaluate both sides of the exact reflection identity
    P({L1, L2}, theta) = P({L1, complement(L2)}, pi - theta)."""
    grid = config.grid
    t_fwd = build_interaction(grid, theta, kernel)
    t_ref = build_interaction(grid, math.pi - theta, kernel)
    a = success_probability_two(config, t_fwd)
    b = success_probability_two(
        TwoLawnConfig(config.lawn1, complement(config.lawn2)), t_ref)
    return ReflectionReport(theta, a, b, abs(a - b))


@dataclass(frozen=True)
class CurveRow:
    theta: float
    p_one: float
    p_two: float
    q: float
    hemisphere: float
    gap_one: float
    gap_two: float
    n_cogs_one: int
    n_cogs_two: int
    seed: int


@dataclass
class ProbabilityCurve:
    rows: list[CurveRow]

    def validate(self):
        """Internal consistency: q, hemisphere, and gap columns are exact
        functions of theta and the probabilities (to 1e-12)."""
        for row in self.rows:
            if abs(row.q - quantum_probability(row.theta)) > 1e-12:
                raise ValueError(f"q column inconsistent at theta={row.theta}")
            if abs(row.hemisphere - hemisphere_probability(row.theta)) > 1e-12:
                raise ValueError(f"hemisphere column inconsistent at theta={row.theta}")
            for p, gap in ((row.p_one, row.gap_one), (row.p_two, row.gap_two)):
                if math.isnan(p) != math.isnan(gap):
                    raise ValueError(f"gap/probability nan mismatch at theta={row.theta}")
                if not math.isnan(p) and abs(gap - (row.q - p)) > 1e-12:
                    raise ValueError(f"gap column inconsistent at theta={row.theta}")


def default_sweep_thetas(n_points: int = 64, q_max: int = 10) -> list[float]:
    """n_points angles uniform on (0.05pi, 0.95pi) merged with all special
    angles theta_q for q = 2..q_max."""
    base = np.linspace(0.05 * math.pi, 0.95 * math.pi, n_points).tolist()
    base.extend(sa.theta for sa in special_angles(q_max))
    # the uniform grid can hit a special angle exactly (it does at pi/4)
    return sorted(set(base))


def _row_to_strings(row: CurveRow) -> list[str]:
    vals = [row.theta, row.p_one, row.p_two, row.q, row.hemisphere,
            row.gap_one, row.gap_two]
    return ["%.12g" % v for v in vals] + [str(row.n_cogs_one), str(row.n_cogs_two), str(row.seed)]


def write_curve_csv(curve: ProbabilityCurve, path):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(_CSV_HEADER + "\n")
        for row in curve.rows:
            fh.write(",".join(_row_to_strings(row)) + "\n")


def read_curve_csv(path) -> ProbabilityCurve:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != _CSV_HEADER:
            raise ValueError(f"{path}: unexpected CSV header {header!r}")
        rows = []
        for line in fh:
            if not line.strip():
                continue
            parts = line.strip().split(",")
            if len(parts) != 10:
                raise ValueError(f"{path}: malformed row {line!r}")
            rows.append(CurveRow(
                *[float(v) for v in parts[:7]],
                int(parts[7]), int(parts[8]), int(parts[9])))
    return ProbabilityCurve(rows)


def one_lawn_initializers(grid: SphericalGrid, theta: float, seed: int) -> list[Lawn]:
    """Default one-lawn replica seeds: predicted cogwheel, random, hemisphere."""
    return [
        cogwheel_lawn(grid, predicted_cogs(theta, "one", 1), 0.5),
        random_lawn(grid, seed + 9001),
        hemisphere_lawn(grid),
    ]


def two_lawn_initializers(grid: SphericalGrid, theta: float, seed: int,
                          one_best: Lawn | None = None) -> list[TwoLawnConfig]:
    """Default two-lawn replica seeds; with `one_best` given, the first entry
    is the complementary pair built from it."""
    n = predicted_cogs(theta, "two", 1)
    inits = []
    if one_best is not None:
        # complementary pair reproduces the one-lawn value exactly, so the
        # two-lawn optimum can never fall below the one-lawn optimum
        inits.append(TwoLawnConfig(one_best.copy(), complement(one_best)))
    inits.extend([
        TwoLawnConfig(cogwheel_lawn(grid, n, 0.5),
                      complement(cogwheel_lawn(grid, n, 0.5, phase=math.pi / n))),
        TwoLawnConfig(random_lawn(grid, seed + 9002), random_lawn(grid, seed + 9003)),
        TwoLawnConfig(hemisphere_lawn(grid), complement(hemisphere_lawn(grid))),
    ])
    return inits


def _sweep_row(grid, theta, setup, row_seed, n_replicas, n_threads, schedule, kernel):
    table = build_interaction(grid, theta, kernel)
    p_one = p_two = math.nan
    cogs_one = cogs_two = 0
    best_one = best_two = None

    if setup in ("one", "both"):
        res = replica_search(one_lawn_initializers(grid, theta, row_seed),
                             table, schedule, row_seed, n_replicas, n_threads)
        p_one, best_one = res.best_probability, res.best_state
        cogs_one = classified_cogs(best_one)
    if setup in ("two", "both"):
        res = replica_search(two_lawn_initializers(grid, theta, row_seed, best_one),
                             table, schedule, row_seed, n_replicas, n_threads)
        p_two, best_two = res.best_probability, res.best_state
        c1, c2 = classified_cogs(best_two.lawn1), classified_cogs(best_two.lawn2)
        cogs_two = c1 if c1 == c2 else 0

    q = quantum_probability(theta)
    row = CurveRow(
        theta=theta, p_one=p_one, p_two=p_two, q=q,
        hemisphere=hemisphere_probability(theta),
        gap_one=q - p_one, gap_two=q - p_two,
        n_cogs_one=cogs_one, n_cogs_two=cogs_two, seed=row_seed,
    )
    return row, best_one, best_two


def _sweep_fingerprint(grid, thetas, setup, base_seed, n_replicas, schedule, kernel):
    return {
        "grid": grid.content_hash,
        "thetas": [float(t).hex() for t in thetas],
        "setup": setup,
        "base_seed": int(base_seed),
        "n_replicas": int(n_replicas),
        "schedule": None if schedule is None else {
            "t_initial": float(schedule.t_initial).hex(),
            "t_final": float(schedule.t_final).hex(),
            "cooling_ratio": float(schedule.cooling_ratio).hex(),
            "sweeps_per_temperature": int(schedule.sweeps_per_temperature),
        },
        "kernel": {"shape": kernel.shape, "half_width": float(kernel.half_width).hex()},
    }


def _row_to_doc(row: CurveRow) -> dict:
    doc = {}
    for f in fields(CurveRow):
        v = getattr(row, f.name)
        doc[f.name] = float(v).hex() if isinstance(v, float) else int(v)
    return doc


def _row_from_doc(doc: dict) -> CurveRow:
    kwargs = {}
    for f in fields(CurveRow):
        v = doc[f.name]
        kwargs[f.name] = float.fromhex(v) if isinstance(v, str) else int(v)
    return CurveRow(**kwargs)


def sweep(grid: SphericalGrid, theta_list, setup: str = "both", *,
          base_seed: int = 0, n_replicas: int = 3, n_threads: int = 1,
          schedule: AnnealSchedule | None = None,
          kernel: DeltaKernel = DEFAULT_KERNEL,
          output_dir=None, progress=None) -> ProbabilityCurve:
    """Optimize at each jump angle and assemble the probability curve.

    Rows are computed in ascending theta order with seeds derived from
    base_seed and the row index, so results do not depend on thread count.
    With output_dir set, best lawns and a row-level checkpoint are persisted
    there (interrupted sweeps resume, skipping completed rows) and the CSV
    is written as sweep.csv.
    """
    if setup not in ("one", "two", "both"):
        raise ValueError(f"setup must be one|two|both, got {setup!r}")
    thetas = sorted(float(t) for t in theta_list)
    if not thetas:
        raise ValueError("theta_list is empty")

    completed: dict[int, CurveRow] = {}
    ckpt_path = fingerprint = None
    if output_dir is not None:
        os.makedirs(output_dir, exist_ok=True)
        fingerprint = _sweep_fingerprint(grid, thetas, setup, base_seed,
                                         n_replicas, schedule, kernel)
        ckpt_path = os.path.join(output_dir, "sweep_checkpoint.json")
        if os.path.exists(ckpt_path):
            with open(ckpt_path, "r", encoding="ascii") as fh:
                doc = json.load(fh)
            if doc.get("fingerprint") == fingerprint:
                completed = {int(k): _row_from_doc(v) for k, v in doc["rows"].items()}

    rows: list[CurveRow] = []
    for i, theta in enumerate(thetas):
        if i in completed:
            rows.append(completed[i])
            continue
        row_seed = base_seed + 7919 * i
        row, best_one, best_two = _sweep_row(
            grid, theta, setup, row_seed, n_replicas, n_threads, schedule, kernel)
        rows.append(row)
        if output_dir is not None:
            if best_one is not None:
                save_lawn(best_one, theta, row.p_one,
                          os.path.join(output_dir, f"lawn_{i:03d}_one.json"))
            if best_two is not None:
                save_lawn(best_two, theta, row.p_two,
                          os.path.join(output_dir, f"lawn_{i:03d}_two.json"))
            completed[i] = row
            doc = {"fingerprint": fingerprint,
                   "rows": {str(k): _row_to_doc(v) for k, v in sorted(completed.items())}}
            tmp = ckpt_path + ".tmp"
            with open(tmp, "w", encoding="ascii") as fh:
                json.dump(doc, fh)
                fh.write("\n")
            os.replace(tmp, ckpt_path)
        if progress is not None:
            progress(i, len(thetas), row)

    curve = ProbabilityCurve(rows)
    curve.validate()
    if output_dir is not None:
        write_curve_csv(curve, os.path.join(output_dir, "sweep.csv"))
    return curve
