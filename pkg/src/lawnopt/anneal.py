"""Simulated-annealing ground-state search for the Hamiltonian H = -P.

Moves are single antipodal-pair toggles (spin-conserving by construction),
accepted by the Metropolis rule on delta-P.  Reproducibility contract:
every temperature block draws its randomness from a counter-based stream
keyed by (seed, block index), so a run is bit-identical regardless of
thread count and can resume from a checkpoint without RNG replay.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _fastpath
from .kernel import InteractionTable
from .lawn import (
    Lawn,
    TwoLawnConfig,
    _rle_decode,
    _rle_encode,
    success_probability_one,
    success_probability_two,
)

# Stream layout inside one Philox key: block t uses counter t << 128, the
# schedule auto-scaling probes use counter 1 << 192.
_BLOCK_SHIFT = 128
_PROBE_COUNTER = 1 << 192

# Exact-P refresh cadence, in sweeps, to reset incremental rounding drift.
RECOMPUTE_SWEEPS = 100

_CHECKPOINT_VERSION = 1


class CheckpointError(ValueError):
    """Checkpoint file missing, corrupt, or from a different run config."""


class TraceRow(NamedTuple):
    temperature: float
    mean_p: float
    acceptance_rate: float
    best_p: float


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric cooling schedule; one sweep = N/2 proposed pair toggles."""

    t_initial: float
    t_final: float
    cooling_ratio: float = 0.95
    sweeps_per_temperature: int = 20
    moves_per_proposal: int = 1

    def __post_init__(self):
        if not (self.t_initial > 0.0 and self.t_final > 0.0):
            raise ValueError("temperatures must be positive")
        if self.t_final > self.t_initial:
            raise ValueError("t_final must not exceed t_initial")
        if not 0.0 < self.cooling_ratio < 1.0:
            raise ValueError("cooling_ratio must lie in (0, 1)")
        if self.sweeps_per_temperature < 1:
            raise ValueError("sweeps_per_temperature must be >= 1")
        if self.moves_per_proposal != 1:
            raise ValueError("only single-toggle proposals are supported")

    def temperatures(self) -> list[float]:
        """T_k = t_initial * ratio^k for all k with T_k >= t_final.

        Computed by powers (not a running product) so a resumed run sees
        the exact same temperature values.
        """
        out = []
        k = 0
        while True:
            t = self.t_initial * self.cooling_ratio**k
            if t < self.t_final:
                break
            out.append(t)
            k += 1
        return out


@dataclass
class AnnealResult:
    best_state: "Lawn | TwoLawnConfig"
    best_probability: float
    trace: list[TraceRow]
    seed: int
    replica_id: int


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=block << _BLOCK_SHIFT))


def _probe_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=_PROBE_COUNTER))


def _full_p(state, table: InteractionTable) -> float:
    if isinstance(state, TwoLawnConfig):
        return success_probability_two(state, table)
    return success_probability_one(state, table)


def default_schedule(initial, table: InteractionTable, seed: int,
                     n_probes: int = 1000) -> AnnealSchedule:
    """Self-scaling schedule: t_initial = 2 * std of delta-P over random
    probe toggles from the initial state, t_final = t_initial * 1e-4."""
    grid = initial.grid
    rng = _probe_rng(seed)
    pairs = rng.integers(0, grid.n_pairs, size=n_probes, dtype=np.int64)
    if isinstance(initial, TwoLawnConfig):
        which = rng.integers(1, 3, size=n_probes, dtype=np.int64)
        deltas = _fastpath.probe_deltas_two(
            initial.lawn1.bits, initial.lawn2.bits,
            table.indptr, table.indices, table.weights,
            grid.antipode, grid.pair_rep, table.prefactor, pairs, which)
    else:
        deltas = _fastpath.probe_deltas_one(
            initial.bits, table.indptr, table.indices, table.weights,
            grid.antipode, grid.pair_rep, table.prefactor, pairs)
    t0 = max(2.0 * float(np.std(deltas)), 1e-12)
    return AnnealSchedule(t_initial=t0, t_final=t0 * 1e-4)


def _fingerprint(table, schedule, seed, replica_id, setup) -> dict:
    return {
        "grid": table.grid_hash,
        "theta": float(table.theta).hex(),
        "setup": setup,
        "seed": int(seed),
        "replica_id": int(replica_id),
        "schedule": {
            "t_initial": float(schedule.t_initial).hex(),
            "t_final": float(schedule.t_final).hex(),
            "cooling_ratio": float(schedule.cooling_ratio).hex(),
            "sweeps_per_temperature": int(schedule.sweeps_per_temperature),
        },
    }


def _write_checkpoint(path, fingerprint, next_block, p_running, best_p,
                      cur_bits, best_bits, trace):
    doc = {
        "version": _CHECKPOINT_VERSION,
        "fingerprint": fingerprint,
        "next_block": int(next_block),
        "p_running": float(p_running).hex(),
        "best_p": float(best_p).hex(),
        "bits": [_rle_encode(b) for b in cur_bits],
        "best_bits": [_rle_encode(b) for b in best_bits],
        "trace": [
            [float(r.temperature).hex(), float(r.mean_p).hex(),
             float(r.acceptance_rate).hex(), float(r.best_p).hex()]
            for r in trace
        ],
    }
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="ascii") as fh:
        json.dump(doc, fh)
        fh.write("\n")
    os.replace(tmp, path)


def _read_checkpoint(path, fingerprint, n_sites, n_lawns):
    with open(path, "r", encoding="ascii") as fh:
        doc = json.load(fh)
    if doc.get("version") != _CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version")
    if doc.get("fingerprint") != fingerprint:
        raise CheckpointError(f"{path}: checkpoint belongs to a different run configuration")
    if len(doc["bits"]) != n_lawns or len(doc["best_bits"]) != n_lawns:
        raise CheckpointError(f"{path}: wrong lawn count")
    cur = [_rle_decode(t, n_sites) for t in doc["bits"]]
    best = [_rle_decode(t, n_sites) for t in doc["best_bits"]]
    trace = [TraceRow(*(float.fromhex(v) for v in row)) for row in doc["trace"]]
    return (int(doc["next_block"]), float.fromhex(doc["p_running"]),
            float.fromhex(doc["best_p"]), cur, best, trace)


def anneal(initial, table: InteractionTable, schedule: AnnealSchedule | None = None,
           seed: int = 0, *, replica_id: int = 0, checkpoint_path=None,
           checkpoint_every: int = 20) -> AnnealResult:
    """Metropolis annealing from `initial`; returns the best-ever state.

    Acceptance: delta-P >= 0 always, else with probability exp(delta-P / T).
    The running P is refreshed by a full evaluation every RECOMPUTE_SWEEPS
    sweeps.  best_probability is a fresh full evaluation of best_state.
    Deterministic given (initial, table, schedule, seed).
    """
    two = isinstance(initial, TwoLawnConfig)
    grid = initial.grid
    table.check_built_for(grid)
    if schedule is None:
        schedule = default_schedule(initial, table, seed)

    if two:
        cur = [initial.lawn1.bits.copy(), initial.lawn2.bits.copy()]
    else:
        cur = [initial.bits.copy()]
    best = [b.copy() for b in cur]

    def rebuild(bit_arrays):
        if two:
            return TwoLawnConfig(Lawn(grid, bit_arrays[0].copy()),
                                 Lawn(grid, bit_arrays[1].copy()))
        return Lawn(grid, bit_arrays[0].copy())

    p_running = _full_p(rebuild(cur), table)
    best_p = p_running
    trace: list[TraceRow] = []
    start_block = 0

    fingerprint = _fingerprint(table, schedule, seed, replica_id,
                               "two" if two else "one")
    if checkpoint_path is not None and os.path.exists(checkpoint_path):
        (start_block, p_running, best_p, cur, best,
         trace) = _read_checkpoint(checkpoint_path, fingerprint,
                                   grid.n_sites, 2 if two else 1)

    temps = schedule.temperatures()
    n_prop = schedule.sweeps_per_temperature * grid.n_pairs
    for block in range(start_block, len(temps)):
        t = temps[block]
        rng = _block_rng(seed, block)
        pairs = rng.integers(0, grid.n_pairs, size=n_prop, dtype=np.int64)
        uniforms = rng.random(n_prop)
        if two:
            which = rng.integers(1, 3, size=n_prop, dtype=np.int64)
            p_running, best_p, n_acc, sum_p = _fastpath.anneal_block_two(
                cur[0], cur[1], best[0], best[1],
                table.indptr, table.indices, table.weights,
                grid.antipode, grid.pair_rep, table.prefactor, t,
                pairs, which, uniforms, p_running, best_p)
        else:
            p_running, best_p, n_acc, sum_p = _fastpath.anneal_block_one(
                cur[0], best[0],
                table.indptr, table.indices, table.weights,
                grid.antipode, grid.pair_rep, table.prefactor, t,
                pairs, uniforms, p_running, best_p)
        trace.append(TraceRow(t, sum_p / n_prop, n_acc / n_prop, best_p))

        sweeps_done = (block + 1) * schedule.sweeps_per_temperature
        if sweeps_done % RECOMPUTE_SWEEPS == 0:
            p_running = _full_p(rebuild(cur), table)
        if checkpoint_path is not None and (block + 1) % checkpoint_every == 0:
            _write_checkpoint(checkpoint_path, fingerprint, block + 1,
                              p_running, best_p, cur, best, trace)

    best_state = rebuild(best)
    result = AnnealResult(
        best_state=best_state,
        best_probability=_full_p(best_state, table),
        trace=trace,
        seed=seed,
        replica_id=replica_id,
    )
    if checkpoint_path is not None:
        _write_checkpoint(checkpoint_path, fingerprint, len(temps),
                          p_running, best_p, cur, best, trace)
    return result


def replica_search(initializers, table: InteractionTable,
                   schedule: AnnealSchedule | None = None, base_seed: int = 0,
                   n_replicas: int = 1, n_threads: int = 1) -> AnnealResult:
    """Independent annealing replicas, round-robin over initializers with
    seeds base_seed + k; returns the best result.

    The reduction is a deterministic argmax (ties go to the lowest replica
    id), so the winner does not depend on thread scheduling.
    """
    initializers = list(initializers)
    if not initializers:
        raise ValueError("replica_search needs at least one initializer")
    if n_replicas < 1:
        raise ValueError(f"n_replicas must be >= 1, got {n_replicas}")

    def run(k: int) -> AnnealResult:
        init = initializers[k % len(initializers)]
        return anneal(init, table, schedule, base_seed + k, replica_id=k)

    if n_threads > 1 and n_replicas > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            results = list(pool.map(run, range(n_replicas)))
    else:
        results = [run(k) for k in range(n_replicas)]
    return max(results, key=lambda r: (r.best_probability, -r.replica_id))
