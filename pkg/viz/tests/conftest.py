"""Fixture data is handwritten in the documented file formats, so these
tests exercise the renderer against the format contract alone (no import
of the optimizer package)."""

import json

import numpy as np
import pytest

# verdict lines recorded by the acceptance test; echoed after the run so
# they stay visible even though output capture hides them per-test
criterion_lines: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if criterion_lines:
        terminalreporter.section("acceptance criteria (viz)")
        for line in criterion_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion_report():
    """Record and assert one `[criterion NN] PASS/FAIL` verdict line."""

    def _report(criterion: int, passed: bool, detail: str):
        line = f"[criterion {criterion:02d}] {'PASS' if passed else 'FAIL'}: {detail}"
        print(line)
        criterion_lines.append(line)
        assert passed, line

    return _report


def antipodal_points(n_pairs: int) -> np.ndarray:
    """Golden-spiral upper hemisphere mirrored through the origin."""
    k = np.arange(n_pairs)
    golden = (1.0 + 5.0 ** 0.5) / 2.0
    z = (k + 0.5) / n_pairs
    az = 2.0 * np.pi * np.mod(k / golden, 1.0)
    rho = np.sqrt(1.0 - z ** 2)
    upper = np.column_stack([rho * np.cos(az), rho * np.sin(az), z])
    return np.vstack([upper, -upper])


def write_grid(path, points: np.ndarray):
    with open(path, "w") as fh:
        fh.write("# source_tag: viz-test\n")
        for p in points:
            fh.write(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g}\n")


def rle_encode(bits) -> str:
    bits = list(int(b) for b in bits)
    runs = []
    i = 0
    while i < len(bits):
        j = i
        while j < len(bits) and bits[j] == bits[i]:
            j += 1
        runs.append(f"{bits[i]}:{j - i}")
        i = j
    return ",".join(runs)


def write_lawn(path, bit_arrays, theta: float, probability=0.5):
    doc = {
        "grid": {"source_tag": "viz-test", "N": int(len(bit_arrays[0])),
                 "content_hash": "0" * 16},
        "theta": float(theta),
        "setup": "one" if len(bit_arrays) == 1 else "two",
        "bits": [rle_encode(b) for b in bit_arrays],
        "probability": probability,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def write_sweep_csv(path, rows):
    header = ("theta,p_one,p_two,q,hemisphere,gap_one,gap_two,"
              "n_cogs_one,n_cogs_two,seed")
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.12g}" if isinstance(v, float) else str(v)
                              for v in row) + "\n")


def cogwheel_bits(points: np.ndarray, n_cogs: int, depth: float = 0.4) -> np.ndarray:
    """Wheel about +z: boundary colatitude pi/2 + depth*cos(n*azimuth).
    Odd n keeps the pattern antipodally consistent."""
    colat = np.arccos(np.clip(points[:, 2], -1.0, 1.0))
    az = np.arctan2(points[:, 1], points[:, 0])
    return (colat < np.pi / 2.0 + depth * np.cos(n_cogs * az)).astype(np.uint8)


@pytest.fixture(scope="session")
def points():
    return antipodal_points(400)


@pytest.fixture(scope="session")
def grid_path(points, tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "grid.txt"
    write_grid(path, points)
    return path
