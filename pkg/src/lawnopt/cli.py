"""Command-line entry point wiring grids, annealing, sweeps, and exports.

Subcommands
-----------
gridgen    write a Fibonacci antipodal grid file
optimize   anneal lawn(s) at a single jump angle, write best lawn JSON
sweep      optimize across a list of jump angles, write sweep CSV
eval       recompute the success probability of a saved lawn file
analyze    cog count and reflection-symmetry check on saved lawn files

`optimize` and `sweep` read a JSON config file (--config); command-line
flags override file values, and the effective config is echoed into the
output directory as config.json.  Every run is seeded explicitly (no
wall-clock seeding), so repeating a command reproduces its outputs byte
for byte.

Exit codes: 0 success, 1 runtime failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys

from .analysis import (
    COG_CONFIDENCE_THRESHOLD,
    classified_cogs,
    count_cogs,
    default_sweep_thetas,
    hemisphere_probability,
    one_lawn_initializers,
    predicted_cogs,
    quantum_probability,
    sweep,
    two_lawn_initializers,
    verify_reflection_symmetry,
)
from .anneal import AnnealSchedule, replica_search
from .grid import GridError, SphericalGrid, generate_fibonacci_antipodal, load_grid, save_grid
from .kernel import (
    DEFAULT_KERNEL,
    KERNEL_SHAPES,
    DeltaKernel,
    GridMismatchError,
    ResolutionError,
    admissible_theta_range,
    build_interaction,
)
from .lawn import (
    Lawn,
    TwoLawnConfig,
    complement,
    load_lawn,
    save_lawn,
    success_probability_one,
    success_probability_two,
)

_SETUPS = ("one", "two", "both")
_INIT_FAMILIES = ("cogwheel", "random", "hemisphere")


class ConfigError(ValueError):
    """Invalid run configuration (maps to exit code 2)."""


def _available_threads() -> int:
    count = getattr(os, "process_cpu_count", os.cpu_count)()
    return max(1, count or 1)


@dataclasses.dataclass
class RunConfig:
    """Resolved settings for optimize/sweep runs.

    `theta` drives optimize, `theta_list` drives sweep; unset schedule
    temperatures mean the annealer derives them from delta statistics.
    """

    grid_path: str | None = None
    n_pairs: int | None = None
    setup: str | None = None
    theta: float | None = None
    theta_list: list[float] | None = None
    kernel_shape: str = DEFAULT_KERNEL.shape
    kernel_half_width: float = DEFAULT_KERNEL.half_width
    t_initial: float | None = None
    t_final: float | None = None
    cooling_ratio: float = 0.95
    sweeps_per_temperature: int = 20
    n_replicas: int = 3
    initializers: str | list[str] = "auto"
    seed: int = 0
    output_dir: str = "lawnopt_out"
    threads: int | None = None

    def delta_kernel(self) -> DeltaKernel:
        return DeltaKernel(half_width=self.kernel_half_width, shape=self.kernel_shape)

    def schedule(self) -> AnnealSchedule | None:
        """Explicit schedule, or None to derive temperatures per replica."""
        if self.t_initial is None:
            if self.t_final is not None:
                raise ConfigError("t_final given without t_initial")
            return None
        t_final = self.t_final if self.t_final is not None else self.t_initial * 1e-4
        return AnnealSchedule(
            t_initial=self.t_initial,
            t_final=t_final,
            cooling_ratio=self.cooling_ratio,
            sweeps_per_temperature=self.sweeps_per_temperature,
        )

    def resolved_threads(self) -> int:
        return self.threads if self.threads is not None else _available_threads()

    def to_doc(self) -> dict:
        """Effective config in the nested JSON layout (echoed next to run outputs)."""
        grid = {"path": self.grid_path} if self.grid_path else {"n_pairs": self.n_pairs}
        return {
            "grid": grid,
            "setup": self.setup,
            "theta": self.theta,
            "theta_list": self.theta_list,
            "kernel": {"shape_id": self.kernel_shape, "half_width": self.kernel_half_width},
            "schedule": {
                "t_initial": self.t_initial,
                "t_final": self.t_final,
                "cooling_ratio": self.cooling_ratio,
                "sweeps_per_temperature": self.sweeps_per_temperature,
            },
            "n_replicas": self.n_replicas,
            "initializers": self.initializers,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "threads": self.resolved_threads(),
        }


def _take(doc: dict, context: str, allowed: tuple[str, ...]) -> dict:
    unknown = set(doc) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown {context} key(s): {', '.join(sorted(unknown))}")
    return doc


def config_from_doc(doc: dict) -> RunConfig:
    """Parse the nested config-file layout into a RunConfig."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    _take(doc, "config", ("grid", "setup", "theta", "theta_list", "kernel",
                          "schedule", "n_replicas", "initializers", "seed",
                          "output_dir", "threads"))
    cfg = RunConfig()
    grid = doc.get("grid")
    if grid is not None:
        _take(grid, "grid", ("path", "n_pairs"))
        cfg.grid_path = grid.get("path")
        cfg.n_pairs = grid.get("n_pairs")
    kernel = doc.get("kernel")
    if kernel is not None:
        _take(kernel, "kernel", ("shape_id", "half_width"))
        cfg.kernel_shape = kernel.get("shape_id", cfg.kernel_shape)
        cfg.kernel_half_width = float(kernel.get("half_width", cfg.kernel_half_width))
    schedule = doc.get("schedule")
    if schedule is not None:
        _take(schedule, "schedule", ("t_initial", "t_final", "cooling_ratio",
                                     "sweeps_per_temperature"))
        if schedule.get("t_initial") is not None:
            cfg.t_initial = float(schedule["t_initial"])
        if schedule.get("t_final") is not None:
            cfg.t_final = float(schedule["t_final"])
        cfg.cooling_ratio = float(schedule.get("cooling_ratio", cfg.cooling_ratio))
        cfg.sweeps_per_temperature = int(
            schedule.get("sweeps_per_temperature", cfg.sweeps_per_temperature))
    if doc.get("setup") is not None:
        cfg.setup = doc["setup"]
    if doc.get("theta") is not None:
        cfg.theta = float(doc["theta"])
    if doc.get("theta_list") is not None:
        cfg.theta_list = [float(t) for t in doc["theta_list"]]
    if doc.get("n_replicas") is not None:
        cfg.n_replicas = int(doc["n_replicas"])
    if doc.get("initializers") is not None:
        cfg.initializers = doc["initializers"]
    if doc.get("seed") is not None:
        cfg.seed = int(doc["seed"])
    if doc.get("output_dir") is not None:
        cfg.output_dir = doc["output_dir"]
    if doc.get("threads") is not None:
        cfg.threads = int(doc["threads"])
    return cfg


def _load_config(args, default_setup: str) -> RunConfig:
    if args.config is not None:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                cfg = config_from_doc(json.load(fh))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}")
    else:
        cfg = RunConfig()

    # flags override file values
    if args.grid is not None and args.pairs is not None:
        raise ConfigError("--grid and --pairs are mutually exclusive")
    if args.grid is not None:
        cfg.grid_path, cfg.n_pairs = args.grid, None
    if args.pairs is not None:
        cfg.grid_path, cfg.n_pairs = None, args.pairs
    if args.setup is not None:
        cfg.setup = args.setup
    if getattr(args, "theta", None) is not None:
        if isinstance(args.theta, list):
            cfg.theta_list = [float(t) for t in args.theta]
        else:
            cfg.theta = float(args.theta)
    for flag, field in (("t_initial", "t_initial"), ("t_final", "t_final"),
                        ("cooling_ratio", "cooling_ratio"),
                        ("sweeps_per_temp", "sweeps_per_temperature"),
                        ("replicas", "n_replicas"), ("seed", "seed"),
                        ("kernel_shape", "kernel_shape"),
                        ("half_width", "kernel_half_width"),
                        ("threads", "threads")):
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, field, value)
    if args.initializers is not None:
        cfg.initializers = ("auto" if args.initializers == "auto"
                            else [s for s in args.initializers.split(",") if s])
    if args.out is not None:
        cfg.output_dir = args.out

    if cfg.setup is None:
        cfg.setup = default_setup
    _validate_config(cfg)
    return cfg


def _validate_config(cfg: RunConfig):
    if (cfg.grid_path is None) == (cfg.n_pairs is None):
        raise ConfigError("config must name exactly one grid source: grid path or n_pairs")
    if cfg.grid_path is not None and not os.path.exists(cfg.grid_path):
        raise ConfigError(f"grid file not found: {cfg.grid_path}")
    if cfg.setup not in _SETUPS:
        raise ConfigError(f"setup must be one of {_SETUPS}, got {cfg.setup!r}")
    if cfg.kernel_shape not in KERNEL_SHAPES:
        raise ConfigError(f"kernel shape must be one of {KERNEL_SHAPES}, got {cfg.kernel_shape!r}")
    if cfg.kernel_half_width <= 0:
        raise ConfigError("kernel half_width must be positive")
    if cfg.n_replicas < 1:
        raise ConfigError("n_replicas must be at least 1")
    if cfg.threads is not None and cfg.threads < 1:
        raise ConfigError("threads must be at least 1")
    if cfg.initializers != "auto":
        unknown = set(cfg.initializers) - set(_INIT_FAMILIES)
        if unknown:
            raise ConfigError(
                f"unknown initializer(s): {', '.join(sorted(unknown))}; "
                f"choose from {_INIT_FAMILIES} or 'auto'")
        if not cfg.initializers:
            raise ConfigError("initializer list is empty")
    cfg.schedule()  # raises ConfigError on inconsistent temperatures


def _config_grid(cfg: RunConfig) -> SphericalGrid:
    if cfg.grid_path is not None:
        return load_grid(cfg.grid_path)
    return generate_fibonacci_antipodal(cfg.n_pairs)


def _check_theta(grid: SphericalGrid, kernel: DeltaKernel, theta: float):
    lo, hi = admissible_theta_range(grid, kernel)
    if not lo <= theta <= hi:
        raise ConfigError(
            f"theta={theta:.12g} outside the admissible range "
            f"[{lo:.12g}, {hi:.12g}] for this grid resolution")


def _select_initializers(inits: list, cfg: RunConfig, prepended: int) -> list:
    """Filter the default initializer list by the configured family names.

    `prepended` counts leading entries (the complementary-of-best pair) that
    are kept regardless of the selection.
    """
    if cfg.initializers == "auto":
        return inits
    head, tail = inits[:prepended], inits[prepended:]
    return head + [lawn for name, lawn in zip(_INIT_FAMILIES, tail)
                   if name in cfg.initializers]


def _echo_config(cfg: RunConfig):
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, "config.json")
    with open(path, "w", encoding="ascii") as fh:
        json.dump(cfg.to_doc(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _print_kv(key: str, value):
    if isinstance(value, float):
        print(f"{key} = {value:.12g}")
    else:
        print(f"{key} = {value}")


def cmd_gridgen(args) -> int:
    grid = generate_fibonacci_antipodal(args.pairs)
    save_grid(grid, args.out)
    _print_kv("grid_file", args.out)
    _print_kv("n_sites", grid.n_sites)
    _print_kv("spacing_h", grid.spacing_h)
    return 0


def cmd_optimize(args) -> int:
    cfg = _load_config(args, default_setup="one")
    if cfg.theta is None:
        raise ConfigError("optimize requires a theta value")
    grid = _config_grid(cfg)
    kernel = cfg.delta_kernel()
    _check_theta(grid, kernel, cfg.theta)
    _echo_config(cfg)

    table = build_interaction(grid, cfg.theta, kernel)
    schedule = cfg.schedule()
    threads = cfg.resolved_threads()
    q = quantum_probability(cfg.theta)
    _print_kv("theta", cfg.theta)
    _print_kv("quantum", q)
    _print_kv("hemisphere", hemisphere_probability(cfg.theta))

    best_one = None
    if cfg.setup in ("one", "both"):
        inits = _select_initializers(
            one_lawn_initializers(grid, cfg.theta, cfg.seed), cfg, 0)
        res = replica_search(inits, table, schedule, cfg.seed, cfg.n_replicas, threads)
        best_one = res.best_state
        path = os.path.join(cfg.output_dir, "best_one.json")
        save_lawn(best_one, cfg.theta, res.best_probability, path)
        _print_kv("setup", "one")
        _print_kv("best_probability", res.best_probability)
        _print_kv("gap", q - res.best_probability)
        _print_kv("n_cogs", classified_cogs(best_one))
        _print_kv("lawn_file", path)
    if cfg.setup in ("two", "both"):
        prepended = 1 if best_one is not None else 0
        inits = _select_initializers(
            two_lawn_initializers(grid, cfg.theta, cfg.seed, best_one), cfg, prepended)
        res = replica_search(inits, table, schedule, cfg.seed, cfg.n_replicas, threads)
        path = os.path.join(cfg.output_dir, "best_two.json")
        save_lawn(res.best_state, cfg.theta, res.best_probability, path)
        _print_kv("setup", "two")
        _print_kv("best_probability", res.best_probability)
        _print_kv("gap", q - res.best_probability)
        _print_kv("n_cogs_lawn1", classified_cogs(res.best_state.lawn1))
        _print_kv("n_cogs_lawn2", classified_cogs(res.best_state.lawn2))
        _print_kv("lawn_file", path)
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args, default_setup="both")
    if cfg.initializers != "auto":
        raise ConfigError("sweep always uses the full initializer policy")
    thetas = cfg.theta_list if cfg.theta_list is not None else default_sweep_thetas()
    grid = _config_grid(cfg)
    kernel = cfg.delta_kernel()
    for theta in thetas:
        _check_theta(grid, kernel, theta)
    _echo_config(cfg)

    def progress(i, total, row):
        print(f"row {i + 1}/{total}: theta={row.theta:.6g} "
              f"p_one={row.p_one:.6g} p_two={row.p_two:.6g}", flush=True)

    sweep(grid, thetas, cfg.setup, base_seed=cfg.seed, n_replicas=cfg.n_replicas,
          n_threads=cfg.resolved_threads(), schedule=cfg.schedule(), kernel=kernel,
          output_dir=cfg.output_dir, progress=progress)
    _print_kv("csv_file", os.path.join(cfg.output_dir, "sweep.csv"))
    return 0


def cmd_eval(args) -> int:
    grid = load_grid(args.grid)
    kernel = DeltaKernel(half_width=args.half_width, shape=args.kernel_shape)
    for path in args.lawns:
        state, stored_theta, stored_p = load_lawn(path, grid)
        theta = args.theta if args.theta is not None else stored_theta
        _check_theta(grid, kernel, theta)
        table = build_interaction(grid, theta, kernel)
        if isinstance(state, Lawn):
            p = success_probability_one(state, table)
        else:
            p = success_probability_two(state, table)
        _print_kv("lawn_file", path)
        _print_kv("setup", "one" if isinstance(state, Lawn) else "two")
        _print_kv("theta", theta)
        _print_kv("probability", p)
        if args.theta is None and stored_p is not None:
            _print_kv("stored_probability", stored_p)
            _print_kv("difference", abs(p - stored_p))
    return 0


def cmd_analyze(args) -> int:
    grid = load_grid(args.grid)
    kernel = DeltaKernel(half_width=args.half_width, shape=args.kernel_shape)
    for path in args.lawns:
        state, theta, _ = load_lawn(path, grid)
        _print_kv("lawn_file", path)
        _print_kv("theta", theta)
        if isinstance(state, Lawn):
            lawns = [("", state)]
            config = TwoLawnConfig(state, complement(state))
            _print_kv("setup", "one")
            _print_kv("predicted_cogs", predicted_cogs(theta, "one"))
        else:
            lawns = [("_lawn1", state.lawn1), ("_lawn2", state.lawn2)]
            config = state
            _print_kv("setup", "two")
            _print_kv("predicted_cogs", predicted_cogs(theta, "two"))
        for suffix, lawn in lawns:
            n, confidence = count_cogs(lawn)
            classified = n if confidence >= COG_CONFIDENCE_THRESHOLD else 0
            _print_kv(f"n_cogs{suffix}", classified)
            _print_kv(f"cog_confidence{suffix}", confidence)
        report = verify_reflection_symmetry(config, theta, kernel)
        _print_kv("reflection_p", report.p_at_theta)
        _print_kv("reflection_p_mirrored", report.p_reflected)
        _print_kv("reflection_difference", report.difference)
    return 0


def _add_config_flags(sub):
    sub.add_argument("--config", default=None, help="JSON config file")
    sub.add_argument("--grid", default=None, help="grid file path")
    sub.add_argument("--pairs", type=int, default=None,
                     help="generate a Fibonacci grid with this many antipodal pairs")
    sub.add_argument("--setup", choices=_SETUPS, default=None)
    sub.add_argument("--kernel-shape", dest="kernel_shape", choices=KERNEL_SHAPES, default=None)
    sub.add_argument("--half-width", dest="half_width", type=float, default=None,
                     help="kernel half-width in units of h")
    sub.add_argument("--t-initial", dest="t_initial", type=float, default=None)
    sub.add_argument("--t-final", dest="t_final", type=float, default=None)
    sub.add_argument("--cooling-ratio", dest="cooling_ratio", type=float, default=None)
    sub.add_argument("--sweeps-per-temp", dest="sweeps_per_temp", type=int, default=None)
    sub.add_argument("--replicas", type=int, default=None)
    sub.add_argument("--initializers", default=None,
                     help="comma-separated subset of cogwheel,random,hemisphere or 'auto'")
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--threads", type=int, default=None,
                     help="worker pool size (default: available parallelism)")
    sub.add_argument("--out", default=None, help="output directory")


def _add_eval_flags(sub):
    sub.add_argument("lawns", nargs="+", help="lawn JSON file(s)")
    sub.add_argument("--grid", required=True, help="grid file the lawns were written for")
    sub.add_argument("--kernel-shape", dest="kernel_shape", choices=KERNEL_SHAPES,
                     default=DEFAULT_KERNEL.shape)
    sub.add_argument("--half-width", dest="half_width", type=float,
                     default=DEFAULT_KERNEL.half_width)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lawnopt",
        description="Optimize antipodal lawn colorings of the sphere by simulated annealing.")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("gridgen", help="write a Fibonacci antipodal grid file")
    sub.add_argument("--pairs", type=int, required=True, help="number of antipodal pairs")
    sub.add_argument("--out", required=True, help="output grid file")
    sub.set_defaults(func=cmd_gridgen)

    sub = subs.add_parser("optimize", help="anneal at a single jump angle")
    _add_config_flags(sub)
    sub.add_argument("--theta", type=float, default=None, help="jump angle in radians")
    sub.set_defaults(func=cmd_optimize)

    sub = subs.add_parser("sweep", help="optimize across a list of jump angles")
    _add_config_flags(sub)
    sub.add_argument("--theta", type=float, action="append", default=None,
                     help="jump angle in radians (repeatable; default: built-in 64-point list)")
    sub.set_defaults(func=cmd_sweep)

    sub = subs.add_parser("eval", help="recompute the probability of saved lawns")
    _add_eval_flags(sub)
    sub.add_argument("--theta", type=float, default=None,
                     help="evaluate at this angle instead of the stored one")
    sub.set_defaults(func=cmd_eval)

    sub = subs.add_parser("analyze", help="cog count and symmetry check of saved lawns")
    _add_eval_flags(sub)
    sub.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GridError, GridMismatchError, ResolutionError,
            FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
