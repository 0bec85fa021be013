"""Shared fixtures and the acceptance-line reporter."""

import numpy as np
import pytest

import sfq_control as sc

GHZ = 2.0 * np.pi * 1e9

# Populated by tests/test_acceptance.py, printed at the end of the run.
ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def transmon_pair():
    """The workhorse pair: 3.9 / 3.5 GHz transmons, alpha = -225 MHz."""
    q0 = sc.transmon_levels(3.9 * GHZ, -0.225 * GHZ, 9)
    q1 = sc.transmon_levels(3.5 * GHZ, -0.225 * GHZ, 9)
    return q0, q1


def make_pair_system(q0, q1, n_levels=5, n_sim=7, j_ghz=0.05, channels=None):
    if channels is None:
        channels = [sc.ControlChannel(0, "z", 0.03), sc.ControlChannel(1, "z", 0.03)]
    return sc.assemble(
        [q0, q1], n_levels=n_levels, n_sim_levels=n_sim,
        j_coupling=j_ghz * GHZ, channels=channels,
    )


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-ish unitary via QR of a complex Ginibre matrix."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))
