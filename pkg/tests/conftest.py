"""Shared fixtures.

Grids and interaction tables dominate suite runtime, so they are built once
per session and shared across files.  `grid_desk` is the N=6000 working
scale; `grid_small` (N=2000) is the largest size where O(N^2) brute-force
oracles stay cheap; `grid_tiny` (N=800) drives CLI and annealer tests.
"""

import math

import numpy as np
import pytest

from lawnopt import (
    AnnealSchedule,
    SphericalGrid,
    build_interaction,
    generate_fibonacci_antipodal,
    save_grid,
)

# verdict lines recorded by the acceptance tests; echoed after the run so
# they stay visible even though output capture hides them per-test
criterion_lines: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if criterion_lines:
        terminalreporter.section("acceptance criteria")
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


@pytest.fixture(scope="session")
def grid_desk() -> SphericalGrid:
    return generate_fibonacci_antipodal(3000)


@pytest.fixture(scope="session")
def grid_small() -> SphericalGrid:
    return generate_fibonacci_antipodal(1000)


@pytest.fixture(scope="session")
def grid_tiny() -> SphericalGrid:
    return generate_fibonacci_antipodal(400)


@pytest.fixture(scope="session")
def octahedron() -> SphericalGrid:
    points = np.array([
        [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0],
    ])
    antipode = np.array([3, 4, 5, 0, 1, 2])
    return SphericalGrid(points=points, antipode=antipode,
                         spacing_h=math.sqrt(4.0 * math.pi / 6.0),
                         source_tag="octahedron")


@pytest.fixture(scope="session")
def table_desk_03pi(grid_desk):
    return build_interaction(grid_desk, 0.3 * math.pi)


@pytest.fixture(scope="session")
def table_small(grid_small):
    return build_interaction(grid_small, 0.8)


@pytest.fixture(scope="session")
def table_tiny(grid_tiny):
    return build_interaction(grid_tiny, 1.0)


@pytest.fixture(scope="session")
def grid_tiny_file(grid_tiny, tmp_path_factory):
    path = tmp_path_factory.mktemp("grids") / "tiny.txt"
    save_grid(grid_tiny, path)
    return path


@pytest.fixture(scope="session")
def grid_desk_file(grid_desk, tmp_path_factory):
    path = tmp_path_factory.mktemp("grids") / "desk.txt"
    save_grid(grid_desk, path)
    return path


@pytest.fixture(scope="session")
def fast_schedule():
    """Short explicit schedule for tests that exercise mechanics, not quality."""
    return AnnealSchedule(t_initial=1e-3, t_final=1e-6, cooling_ratio=0.9,
                          sweeps_per_temperature=5)
