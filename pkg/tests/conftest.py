import numpy as np
import pytest

from hcflow.grid import grid_points

EPS = np.finfo(float).eps


def circle_points(J: int, r: float = 1.0) -> np.ndarray:
    u = 2 * np.pi * grid_points(J)
    return r * np.stack([np.cos(u), np.sin(u)], axis=-1)


def random_star_curve(rng: np.random.Generator, J: int, amp: float = 0.3) -> np.ndarray:
    """Star-shaped polygon with a randomly perturbed radius; always a valid geometry."""
    u = 2 * np.pi * grid_points(J)
    r = 1.0 + amp * sum(
        rng.uniform(-1, 1) / k**2 * np.cos(k * u + rng.uniform(0, 2 * np.pi)) for k in range(1, 5)
    )
    return r[:, None] * np.stack([np.cos(u), np.sin(u)], axis=-1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
