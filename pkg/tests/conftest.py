import time

import numpy as np
import pytest

from streampca.harness import ExperimentConfig, run_experiment

ACCEPTANCE = {}
RUNTIMES = {}


def record_criterion(number, passed, detail):
    ACCEPTANCE[number] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def smallest_run():
    """Krasulina-min on {0.5, 1.0 x 9}, gamma_n = 1/n, R=50, n=1e5."""
    cfg = ExperimentConfig(
        scheme="krasulina", variant="smallest", spectrum="smallest-id",
        n_total=100_000, replicates=50, seed=2017,
    )
    return timed(cfg)


@pytest.fixture(scope="session")
def paper4_run():
    """Krasulina-max on the paper4 preset under the same protocol."""
    cfg = ExperimentConfig(
        scheme="krasulina", variant="largest", spectrum="paper4",
        n_total=100_000, replicates=50, seed=2017,
    )
    return timed(cfg)


def timed(cfg):
    start = time.perf_counter()
    result = run_experiment(cfg, threads=1)
    RUNTIMES[id(result)] = time.perf_counter() - start
    return result
