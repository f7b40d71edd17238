"""Acceptance gate: one test per shipped guarantee, each emitting a single
`[criterion NN] PASS/FAIL: ...` line.

Desk scale means the 6000-site Fibonacci grid with the default kernel.
Annealing results are shared through module-scoped fixtures, so the heavy
criteria (6 through 9) reuse each other's optima instead of re-annealing.
"""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from lawnopt import (
    Lawn,
    TwoLawnConfig,
    anneal,
    apply_pair_toggle,
    build_interaction,
    classified_cogs,
    cogwheel_lawn,
    delta_pair_toggle,
    gap_maximizer_landmark,
    hemisphere_lawn,
    one_lawn_initializers,
    quantum_probability,
    random_lawn,
    replica_search,
    success_probability_one,
    success_probability_two,
    two_lawn_initializers,
    verify_reflection_symmetry,
)
from lawnopt.kernel import DEFAULT_KERNEL


def brute_force_probability(state, theta: float, kernel=DEFAULT_KERNEL) -> float:
    """Independent O(N^2) double sum straight from the definition, using
    arccos angles rather than the package's chord form."""
    if isinstance(state, Lawn):
        grid = state.grid
        s = state.bits.astype(np.float64)
        f = np.outer(s, s)
    else:
        grid = state.lawn1.grid
        s1 = state.lawn1.bits.astype(np.float64)
        s2 = state.lawn2.bits.astype(np.float64)
        f = np.outer(s1, 1.0 - s2)
    n, h = grid.n_sites, grid.spacing_h
    ang = np.arccos(np.clip(grid.points @ grid.points.T, -1.0, 1.0))
    w = kernel.phi((ang - theta) / h)
    np.fill_diagonal(w, 0.0)
    w[np.arange(n), grid.antipode] = 0.0
    return 4.0 / (math.sin(theta) * n * n * h) * float(np.sum(f * w))


@pytest.fixture(scope="module")
def tables(grid_desk, table_desk_03pi):
    cache = {0.3 * math.pi: table_desk_03pi}

    def get(theta: float):
        if theta not in cache:
            cache[theta] = build_interaction(grid_desk, theta)
        return cache[theta]

    return get


@pytest.fixture(scope="module")
def cogwheel_replicas(grid_desk, tables):
    table = tables(0.3 * math.pi)
    inits = one_lawn_initializers(grid_desk, 0.3 * math.pi, 600)
    return [anneal(inits[k % len(inits)], table, None, 600 + k, replica_id=k)
            for k in range(10)]


@pytest.fixture(scope="module")
def best_cogwheel_one(cogwheel_replicas):
    return max(cogwheel_replicas,
               key=lambda r: (r.best_probability, -r.replica_id))


@pytest.fixture(scope="module")
def two_lawn_winner(grid_desk, tables, best_cogwheel_one):
    inits = two_lawn_initializers(grid_desk, 0.3 * math.pi, 610,
                                  best_cogwheel_one.best_state)
    return replica_search(inits, tables(0.3 * math.pi), None, 610,
                          n_replicas=4, n_threads=1)


@pytest.fixture(scope="module")
def one_fifth_pi(grid_desk, tables):
    inits = one_lawn_initializers(grid_desk, math.pi / 5, 300)
    return replica_search(inits, tables(math.pi / 5), None, 300,
                          n_replicas=3, n_threads=1)


@pytest.fixture(scope="module")
def two_quarter_pi(grid_desk, tables):
    inits = two_lawn_initializers(grid_desk, math.pi / 4, 310, None)
    return replica_search(inits, tables(math.pi / 4), None, 310,
                          n_replicas=3, n_threads=1)


@pytest.fixture(scope="module")
def two_fifth_pi(grid_desk, tables, one_fifth_pi):
    inits = two_lawn_initializers(grid_desk, math.pi / 5, 320,
                                  one_fifth_pi.best_state)
    return replica_search(inits, tables(math.pi / 5), None, 320,
                          n_replicas=3, n_threads=1)


@pytest.fixture(scope="module")
def two_tenth_pi(grid_desk, tables):
    inits = two_lawn_initializers(grid_desk, math.pi / 10, 330, None)
    return replica_search(inits, tables(math.pi / 10), None, 330,
                          n_replicas=3, n_threads=1)


def test_criterion_01_hemisphere_baseline(grid_desk, tables, criterion_report):
    lawn = hemisphere_lawn(grid_desk)
    worst = 0.0
    for q in (6, 5, 4, 3):
        theta = math.pi / q
        p = success_probability_one(lawn, tables(theta))
        worst = max(worst, abs(p - (1.0 - theta / math.pi)))
    criterion_report(1, worst < 0.01,
           f"hemisphere P vs 1-theta/pi at pi/{{6,5,4,3}}: max error {worst:.3g} (limit 0.01)")


def test_criterion_02_half_pi_universality(grid_desk, tables, criterion_report):
    table = tables(math.pi / 2)
    errors = [abs(success_probability_one(random_lawn(grid_desk, s), table) - 0.5)
              for s in range(1000, 1010)]
    annealed = [
        anneal(random_lawn(grid_desk, 400 + 9001), table, None, 400),
        anneal(cogwheel_lawn(grid_desk, 5, 0.5), table, None, 341),
    ]
    errors += [abs(r.best_probability - 0.5) for r in annealed]
    worst = max(errors)
    criterion_report(2, worst <= 0.005,
           f"|P-1/2| at pi/2 over 10 random + 2 annealed lawns: max {worst:.3g} (limit 0.005)")


def test_criterion_03_reflection_identity(grid_desk, criterion_report):
    config = TwoLawnConfig(random_lawn(grid_desk, 31), random_lawn(grid_desk, 32))
    worst = max(verify_reflection_symmetry(config, frac * math.pi).difference
                for frac in (0.2, 0.3, 0.45))
    criterion_report(3, worst <= 1e-12,
           f"|P(theta) - P_mirrored(pi-theta)| max {worst:.3g} (limit 1e-12)")


def test_criterion_04_brute_force_oracle(octahedron, grid_small, table_small,
                                          criterion_report):
    # probability path: package CSR evaluation vs independent dense double sum
    oct_table = build_interaction(octahedron, math.pi / 2, check_resolution=False)
    oct_lawn = hemisphere_lawn(octahedron)
    oct_two = TwoLawnConfig(oct_lawn, random_lawn(octahedron, 8))
    small_lawn = random_lawn(grid_small, 77)
    small_two = TwoLawnConfig(random_lawn(grid_small, 78), random_lawn(grid_small, 79))
    p_err = max(
        abs(success_probability_one(oct_lawn, oct_table)
            - brute_force_probability(oct_lawn, math.pi / 2)),
        abs(success_probability_two(oct_two, oct_table)
            - brute_force_probability(oct_two, math.pi / 2)),
        abs(success_probability_one(small_lawn, table_small)
            - brute_force_probability(small_lawn, 0.8)),
        abs(success_probability_two(small_two, table_small)
            - brute_force_probability(small_two, 0.8)),
    )

    # delta path: closed-form toggle deltas vs full recomputation, 10^3 moves
    rng = np.random.default_rng(4000)
    d_err = 0.0
    p = success_probability_one(small_lawn, table_small)
    for site in rng.integers(0, grid_small.n_sites, 500):
        d = delta_pair_toggle(small_lawn, table_small, 1, int(site))
        apply_pair_toggle(small_lawn, 1, int(site))
        p_new = success_probability_one(small_lawn, table_small)
        d_err = max(d_err, abs(d - (p_new - p)))
        p = p_new
    p = success_probability_two(small_two, table_small)
    for site in rng.integers(0, grid_small.n_sites, 500):
        which = 1 + int(site) % 2
        d = delta_pair_toggle(small_two, table_small, which, int(site))
        apply_pair_toggle(small_two, which, int(site))
        p_new = success_probability_two(small_two, table_small)
        d_err = max(d_err, abs(d - (p_new - p)))
        p = p_new
    criterion_report(4, p_err <= 1e-12 and d_err <= 1e-12,
           f"brute-force max diff {p_err:.3g}, toggle-delta max diff {d_err:.3g} "
           f"over 1000 moves (limit 1e-12)")


def test_criterion_05_incremental_drift(grid_desk, table_desk_03pi,
                                         criterion_report):
    lawn = random_lawn(grid_desk, 55)
    rng = np.random.default_rng(56)
    p = success_probability_one(lawn, table_desk_03pi)
    for site in rng.integers(0, grid_desk.n_sites, 10_000):
        p += delta_pair_toggle(lawn, table_desk_03pi, 1, int(site))
        apply_pair_toggle(lawn, 1, int(site))
    drift = abs(p - success_probability_one(lawn, table_desk_03pi))
    criterion_report(5, drift < 1e-9,
           f"running-sum drift after 10^4 toggles: {drift:.3g} (limit 1e-9)")


def test_criterion_06_cogwheel_advantage(cogwheel_replicas, best_cogwheel_one,
                                         criterion_report,
                                         two_lawn_winner):
    hits = sum(1 for r in cogwheel_replicas
               if classified_cogs(r.best_state) == 7)
    p_best = best_cogwheel_one.best_probability
    floor = 1.0 - 0.3 + 0.005
    cogs1 = classified_cogs(two_lawn_winner.best_state.lawn1)
    cogs2 = classified_cogs(two_lawn_winner.best_state.lawn2)
    passed = p_best > floor and hits >= 8 and cogs1 == 3 and cogs2 == 3
    criterion_report(6, passed,
           f"one-lawn at 0.3pi: P={p_best:.6f} (floor {floor}), 7-cog replicas "
           f"{hits}/10 (need 8); two-lawn cogs ({cogs1},{cogs2}) (need (3,3))")


def test_criterion_07_gap_reproduction(one_fifth_pi, two_quarter_pi,
                                       criterion_report):
    gap_one = quantum_probability(math.pi / 5) - one_fifth_pi.best_probability
    gap_two = quantum_probability(math.pi / 4) - two_quarter_pi.best_probability
    passed = (abs(gap_two - 0.10355) <= 0.002
              and abs(gap_one - 0.10451) <= 0.002
              and gap_one > gap_two)
    criterion_report(7, passed,
           f"gap_two(pi/4)={gap_two:.5f} (0.10355+-0.002), "
           f"gap_one(pi/5)={gap_one:.5f} (0.10451+-0.002), ordering "
           f"{'holds' if gap_one > gap_two else 'violated'}")


def test_criterion_08_hemisphere_near_optimality(one_fifth_pi, two_tenth_pi,
                                                 criterion_report):
    err_one = abs(one_fifth_pi.best_probability - 4.0 / 5.0)
    err_two = abs(two_tenth_pi.best_probability - 9.0 / 10.0)
    criterion_report(8, err_one <= 0.005 and err_two <= 0.005,
           f"one-lawn pi/5 |P-4/5|={err_one:.4f}, two-lawn pi/10 "
           f"|P-9/10|={err_two:.4f} (limit 0.005)")


def test_criterion_09_odd_q_two_lawn_strictness(two_fifth_pi, criterion_report):
    margin = two_fifth_pi.best_probability - 4.0 / 5.0
    criterion_report(9, margin >= 0.002,
           f"two-lawn at pi/5 beats hemisphere by {margin:.4f} (need >= 0.002)")


def test_criterion_10_landmark_constant(criterion_report):
    ratio = math.pi / gap_maximizer_landmark()
    criterion_report(10, abs(ratio - 4.5523) <= 1e-3,
           f"pi / gap landmark = {ratio:.5f} (4.5523 +- 1e-3)")


def test_criterion_11_byte_determinism(grid_desk_file, tmp_path, criterion_report):
    cfg = {
        "grid": {"path": str(grid_desk_file)},
        "setup": "both",
        "theta_list": [math.pi / 4, 0.3 * math.pi],
        "schedule": {"t_initial": 1e-3, "t_final": 1e-7,
                     "cooling_ratio": 0.9, "sweeps_per_temperature": 5},
        "n_replicas": 2,
        "seed": 77,
    }
    cfg_path = tmp_path / "sweep.json"
    cfg_path.write_text(json.dumps(cfg))

    outputs = ("sweep.csv", "lawn_000_one.json", "lawn_000_two.json",
               "lawn_001_one.json", "lawn_001_two.json")
    payloads = []
    for label, threads in (("a", "1"), ("b", "1"), ("c", "4")):
        out = tmp_path / label
        proc = subprocess.run(
            [sys.executable, "-m", "lawnopt.cli", "sweep", "--config",
             str(cfg_path), "--threads", threads, "--out", str(out)],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        payloads.append([(out / name).read_bytes() for name in outputs])
    passed = payloads[0] == payloads[1] == payloads[2]
    criterion_report(11, passed,
           "sweep CSV and lawn files byte-identical across two runs and "
           "thread counts {1,4}" if passed else
           "outputs differ across reruns or thread counts")
