from __future__ import annotations

import numpy as np
import pytest


def wootters(rho: np.ndarray) -> float:
    """Reference concurrence from the spin-flipped spectrum."""
    sy = np.array([[0, -1j], [1j, 0]])
    yy = np.kron(sy, sy)
    r = rho @ yy @ rho.conj() @ yy
    lam = np.sqrt(np.clip(np.sort(np.linalg.eigvals(r).real)[::-1], 0, None))
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def random_x_entries(rng: np.random.Generator, equal_perp: bool = True):
    """Random valid X-state entries; with equal_perp exactly one coherence is non-zero."""
    d = rng.dirichlet(np.ones(4))
    x14 = x23 = 0.0
    if equal_perp:
        if rng.random() < 0.5:
            x14 = rng.uniform(-1, 1) * np.sqrt(d[0] * d[3])
        else:
            x23 = rng.uniform(-1, 1) * np.sqrt(d[1] * d[2])
    else:
        x14 = rng.uniform(-1, 1) * np.sqrt(d[0] * d[3])
        x23 = rng.uniform(-1, 1) * np.sqrt(d[1] * d[2])
    return (*d, x14, x23)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
