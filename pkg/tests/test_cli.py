"""End-to-end command-line tests running the installed entry point as a
subprocess: argument handling, exit codes, artifact layout, byte-level
reproducibility, and sweep crash recovery."""

import json
import math
import os
import signal
import subprocess
import sys
import time

import pytest

from lawnopt import (
    build_interaction,
    cogwheel_lawn,
    hemisphere_lawn,
    load_grid,
    load_lawn,
    save_lawn,
    success_probability_one,
)

FAST = ["--t-initial", "1e-3", "--t-final", "1e-6",
        "--cooling-ratio", "0.9", "--sweeps-per-temp", "5"]
# slow enough that a 3-row sweep survives a few seconds before finishing
SLOW = ["--t-initial", "1e-3", "--t-final", "1e-7",
        "--cooling-ratio", "0.97", "--sweeps-per-temp", "25"]


def run_cli(*args, check=True):
    proc = subprocess.run([sys.executable, "-m", "lawnopt.cli", *args],
                          capture_output=True, text=True)
    if check:
        assert proc.returncode == 0, proc.stderr
    return proc


def kv(stdout: str) -> dict:
    """Parse `key = value` report lines (last occurrence wins)."""
    out = {}
    for line in stdout.splitlines():
        if " = " in line:
            key, _, value = line.partition(" = ")
            out[key] = value
    return out


@pytest.fixture(scope="module")
def grid_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "grid.txt"
    run_cli("gridgen", "--pairs", "400", "--out", str(path))
    return path


@pytest.fixture(scope="module")
def optimize_run(grid_file, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_opt") / "run"
    proc = run_cli("optimize", "--grid", str(grid_file), "--theta", "0.8",
                   "--setup", "one", *FAST, "--replicas", "2", "--seed", "11",
                   "--threads", "1", "--out", str(out))
    return proc, out


def test_gridgen_reports_and_is_reproducible(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    proc = run_cli("gridgen", "--pairs", "400", "--out", str(a))
    report = kv(proc.stdout)
    assert report["n_sites"] == "800"
    assert float(report["spacing_h"]) == pytest.approx(math.sqrt(4 * math.pi / 800))
    g = load_grid(a)
    assert g.n_sites == 800
    run_cli("gridgen", "--pairs", "400", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_gridgen_rejects_degenerate_grid(tmp_path):
    proc = run_cli("gridgen", "--pairs", "2", "--out", str(tmp_path / "g.txt"),
                   check=False)
    assert proc.returncode == 2
    assert "error:" in proc.stderr


def test_optimize_writes_lawn_and_echoes_config(optimize_run, grid_file):
    proc, out = optimize_run
    report = kv(proc.stdout)
    assert float(report["quantum"]) == pytest.approx(math.cos(0.4) ** 2)
    assert float(report["hemisphere"]) == pytest.approx(1.0 - 0.8 / math.pi)
    assert 0.0 < float(report["best_probability"]) < 1.0
    assert float(report["gap"]) == pytest.approx(
        float(report["quantum"]) - float(report["best_probability"]), abs=1e-9)
    assert "n_cogs" in report

    echoed = json.loads((out / "config.json").read_text())
    assert echoed["seed"] == 11
    assert echoed["setup"] == "one"
    assert echoed["grid"] == {"path": str(grid_file)}
    assert echoed["schedule"]["t_initial"] == 1e-3
    assert echoed["threads"] == 1

    grid = load_grid(grid_file)
    state, theta, stored_p = load_lawn(out / "best_one.json", grid)
    assert theta == 0.8
    # console report rounds to 12 significant digits; the file keeps full precision
    assert stored_p == pytest.approx(float(report["best_probability"]), abs=1e-11)


def test_optimize_rerun_is_byte_identical_across_threads(optimize_run, grid_file,
                                                         tmp_path):
    _, out = optimize_run
    for threads in ("1", "4"):
        rerun = tmp_path / f"t{threads}"
        run_cli("optimize", "--grid", str(grid_file), "--theta", "0.8",
                "--setup", "one", *FAST, "--replicas", "2", "--seed", "11",
                "--threads", threads, "--out", str(rerun))
        assert (rerun / "best_one.json").read_bytes() == \
            (out / "best_one.json").read_bytes()


def test_optimize_config_file_with_flag_override(grid_file, tmp_path):
    cfg = {
        "grid": {"path": str(grid_file)},
        "setup": "one",
        "theta": 0.8,
        "schedule": {"t_initial": 1e-3, "t_final": 1e-6,
                     "cooling_ratio": 0.9, "sweeps_per_temperature": 5},
        "n_replicas": 2,
        "seed": 999,
        "output_dir": str(tmp_path / "from_file"),
    }
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "overridden"
    proc = run_cli("optimize", "--config", str(cfg_path), "--seed", "11",
                   "--threads", "1", "--out", str(out))
    echoed = json.loads((out / "config.json").read_text())
    assert echoed["seed"] == 11  # flag beats file
    assert echoed["n_replicas"] == 2  # file value survives
    assert 0.0 < float(kv(proc.stdout)["best_probability"]) < 1.0


def test_eval_reproduces_stored_probability(optimize_run, grid_file):
    _, out = optimize_run
    proc = run_cli("eval", str(out / "best_one.json"), "--grid", str(grid_file))
    report = kv(proc.stdout)
    assert float(report["difference"]) <= 1e-9
    assert float(report["theta"]) == 0.8


def test_eval_hemisphere_lawn_near_two_thirds(grid_file, tmp_path):
    grid = load_grid(grid_file)
    theta = math.pi / 3
    lawn = hemisphere_lawn(grid)
    p = success_probability_one(lawn, build_interaction(grid, theta))
    path = tmp_path / "hemi.json"
    save_lawn(lawn, theta, p, path)
    report = kv(run_cli("eval", str(path), "--grid", str(grid_file)).stdout)
    assert abs(float(report["probability"]) - 2.0 / 3.0) < 0.01
    assert float(report["difference"]) == 0.0


def test_eval_rejects_mismatched_grid(optimize_run, tmp_path):
    _, out = optimize_run
    other = tmp_path / "other.txt"
    run_cli("gridgen", "--pairs", "500", "--out", str(other))
    proc = run_cli("eval", str(out / "best_one.json"), "--grid", str(other),
                   check=False)
    assert proc.returncode == 2
    assert "error:" in proc.stderr


def test_analyze_synthetic_cogwheel(grid_file, tmp_path):
    grid = load_grid(grid_file)
    theta = 2.0 * math.pi / 5.0  # predicted one-lawn cog count is exactly 5
    path = tmp_path / "wheel.json"
    save_lawn(cogwheel_lawn(grid, 5, 0.5), theta, 0.0, path)
    report = kv(run_cli("analyze", str(path), "--grid", str(grid_file)).stdout)
    assert report["setup"] == "one"
    assert report["predicted_cogs"] == "5"
    assert report["n_cogs"] == "5"
    assert float(report["cog_confidence"]) > 0.35
    assert float(report["reflection_difference"]) <= 1e-12


@pytest.mark.parametrize("extra", [
    [],                                       # no theta anywhere
    ["--theta", "0.8", "--initializers", "bogus"],
    ["--theta", "0.05"],                      # below the admissible range
    ["--theta", "0.8", "--pairs", "400"],     # two grid sources
    ["--theta", "0.8", "--t-final", "1e-6"],  # t_final without t_initial
])
def test_optimize_invalid_input_exits_2(grid_file, tmp_path, extra):
    proc = run_cli("optimize", "--grid", str(grid_file), *extra,
                   "--out", str(tmp_path / "x"), check=False)
    assert proc.returncode == 2
    assert "error:" in proc.stderr


def test_config_file_rejects_unknown_key(grid_file, tmp_path):
    cfg_path = tmp_path / "bad.json"
    cfg_path.write_text(json.dumps({"grid": {"path": str(grid_file)},
                                    "theta": 0.8, "temperature": 1.0}))
    proc = run_cli("optimize", "--config", str(cfg_path), check=False)
    assert proc.returncode == 2
    assert "temperature" in proc.stderr


def test_config_file_rejects_malformed_json(tmp_path):
    cfg_path = tmp_path / "broken.json"
    cfg_path.write_text("{not json")
    proc = run_cli("optimize", "--config", str(cfg_path), check=False)
    assert proc.returncode == 2
    assert "error:" in proc.stderr


def test_unwritable_output_dir_exits_1(grid_file, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("occupied")
    proc = run_cli("optimize", "--grid", str(grid_file), "--theta", "0.8",
                   *FAST, "--out", str(blocker / "sub"), check=False)
    assert proc.returncode == 1
    assert "error:" in proc.stderr


def test_sweep_rejects_initializer_subset(grid_file, tmp_path):
    proc = run_cli("sweep", "--grid", str(grid_file), "--theta", "0.8",
                   "--initializers", "cogwheel", "--out", str(tmp_path / "x"),
                   check=False)
    assert proc.returncode == 2


def sweep_cmd(grid_file, out):
    return [sys.executable, "-m", "lawnopt.cli", "sweep",
            "--grid", str(grid_file), "--theta", "1.2", "--theta", "0.8",
            "--theta", "1.6", "--setup", "one", *SLOW, "--replicas", "2",
            "--seed", "21", "--threads", "1", "--out", str(out)]


def test_sweep_rows_sorted_then_kill_and_resume(grid_file, tmp_path):
    control = tmp_path / "control"
    proc = subprocess.run(sweep_cmd(grid_file, control),
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    lines = (control / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("theta,p_one,p_two,")
    thetas = [float(row.split(",")[0]) for row in lines[1:]]
    assert thetas == sorted(thetas) and len(thetas) == 3  # flags gave 1.2,0.8,1.6

    # kill a fresh run after its first checkpointed row, then resume it
    killed = tmp_path / "killed"
    worker = subprocess.Popen(sweep_cmd(grid_file, killed),
                              stdout=subprocess.DEVNULL,
                              stderr=subprocess.DEVNULL)
    ckpt = killed / "sweep_checkpoint.json"
    deadline = time.monotonic() + 120.0
    try:
        while time.monotonic() < deadline:
            if ckpt.exists() and json.loads(ckpt.read_text())["rows"]:
                break
            if worker.poll() is not None:
                break
            time.sleep(0.05)
        else:
            pytest.fail("sweep produced no checkpoint within the deadline")
    finally:
        if worker.poll() is None:
            os.kill(worker.pid, signal.SIGKILL)
        worker.wait()
    assert json.loads(ckpt.read_text())["rows"]

    proc = subprocess.run(sweep_cmd(grid_file, killed),
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (killed / "sweep.csv").read_bytes() == \
        (control / "sweep.csv").read_bytes()
    for name in ("lawn_000_one.json", "lawn_001_one.json", "lawn_002_one.json"):
        assert (killed / name).read_bytes() == (control / name).read_bytes()
