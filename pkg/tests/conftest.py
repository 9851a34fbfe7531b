import time
from dataclasses import dataclass

import numpy as np
import pytest
from scipy import integrate, special

from ris_secrecy.geometry import SystemParams
from ris_secrecy.montecarlo import run_trials


@pytest.fixture
def params():
    return SystemParams()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def marcum_oracle(a, b):
    """Q₁(a, b) by direct quadrature of ∫_b^∞ t exp(-(t²+a²)/2) I₀(at) dt."""
    if b == 0:
        return 1.0
    # i0e(z) = e^{-z} I₀(z) keeps the integrand finite for large a·t
    f = lambda t: t * np.exp(-0.5 * (t - a) ** 2) * special.i0e(a * t)
    val, _ = integrate.quad(f, b, np.inf, epsabs=1e-14, epsrel=1e-12, limit=400)
    return val


def z_samples(n_ris, n_draws, rng, chunk=20_000):
    """Draws of Z = (Σ|g_i||h_i|)² with CN(0, 1) fading, generated in chunks."""
    from ris_secrecy.channel import complex_normal
    out = []
    left = n_draws
    while left:
        m = min(chunk, left)
        g = complex_normal(rng, (m, n_ris))
        h = complex_normal(rng, (m, n_ris))
        out.append(np.sum(np.abs(g) * np.abs(h), axis=1) ** 2)
        left -= m
    return np.concatenate(out)


@pytest.fixture(scope="session")
def default_params():
    return SystemParams()


@dataclass
class TimedRun:
    records: list
    seconds: float


def timed_run(params, mode, n_trials, seed):
    start = time.perf_counter()
    records = run_trials(params, mode, n_trials, seed)
    return TimedRun(records, time.perf_counter() - start)


@pytest.fixture(scope="session")
def single_run_1e5(default_params):
    return timed_run(default_params, "single", 100_000, seed=2024)


@pytest.fixture(scope="session")
def single_records_1e5(single_run_1e5):
    return single_run_1e5.records


# ---------------------------------------------------------------- acceptance report

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def acceptance():
    """Record one line per acceptance criterion: acceptance(number, ok, detail)."""
    def record(number, ok, detail):
        _ACCEPTANCE[number] = (bool(ok), detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
