"""Monte-Carlo oracle: PPP + fading draws, empirical CDFs, secrecy-capacity estimates.

Trial ``i`` of a run with master seed ``s`` draws from its own stream
``SeedSequence(s, spawn_key=(i,))``, so results do not depend on how trials
are split across worker processes.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import channel as ch
from .geometry import sample_ppp_arrays

MODES = ("single", "multi")
SAMPLERS = ("reduced", "full")


@dataclass(frozen=True)
class TrialRecord:
    bob_snr: float
    eve_snr: float
    eve_count: int


def trial_rng(seed, index):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def simulate_trial(params, mode, rng, sampler="reduced"):
    """One realisation: PPP, fading, phases, Bob SNR and best-UAV SNR.

    In multi-antenna mode ``sampler="reduced"`` draws only the parts of H that
    the SNRs depend on (same joint law, see :func:`channel.sample_mrt_snrs`);
    ``sampler="full"`` draws the whole N x K matrix.
    """
    if mode == "single":
        params = params.updated(n_ant=1)
    eves = sample_ppp_arrays(params, rng)
    if mode == "multi" and sampler == "reduced":
        bob, eve = ch.sample_mrt_snrs(params, eves, rng)
        return TrialRecord(bob, float(eve.max()) if eve.size else 0.0, int(eve.size))
    real = ch.sample_realization(params, eves, rng)
    if mode == "single":
        real = real.with_phases(ch.optimal_phase_shifts(real))
        bob = ch.bob_snr_single(real, params)
        eve = ch.eve_snrs_single(real, params)
    elif mode == "multi":
        real = real.with_phases(ch.random_phase_shifts(params.n_ris, rng))
        w = ch.mrt_beamformer(real)
        bob = ch.bob_snr_multi(real, params)
        eve = ch.eve_snrs_multi(real, w, params)
    else:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return TrialRecord(bob, float(eve.max()) if eve.size else 0.0, int(eve.size))


def _run_chunk(args):
    params, mode, seed, start, stop, sampler = args
    return [simulate_trial(params, mode, trial_rng(seed, i), sampler) for i in range(start, stop)]


def run_trials(params, mode, n_trials, seed, workers=1, sampler="reduced"):
    """Run ``n_trials`` independent trials; output is identical for any ``workers``."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if sampler not in SAMPLERS:
        raise ValueError(f"sampler must be one of {SAMPLERS}, got {sampler!r}")
    if int(n_trials) != n_trials or n_trials < 1:
        raise ValueError(f"n_trials must be a positive integer, got {n_trials!r}")
    if int(seed) != seed or seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
    params.check()
    n_trials = int(n_trials)
    workers = max(1, min(int(workers), n_trials))
    if workers == 1:
        return _run_chunk((params, mode, int(seed), 0, n_trials, sampler))
    bounds = np.linspace(0, n_trials, 4 * workers + 1).astype(int)
    jobs = [(params, mode, int(seed), int(a), int(b), sampler) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunks = list(pool.map(_run_chunk, jobs))
    return [rec for chunk in chunks for rec in chunk]


def records_to_arrays(records):
    """(bob_snr, eve_snr, eve_count) as numpy arrays."""
    bob = np.fromiter((r.bob_snr for r in records), float, len(records))
    eve = np.fromiter((r.eve_snr for r in records), float, len(records))
    cnt = np.fromiter((r.eve_count for r in records), int, len(records))
    return bob, eve, cnt


def scale_records(records, factor):
    """Records at transmit SNR ρ·factor; every SNR is linear in ρ for a fixed draw."""
    return [TrialRecord(r.bob_snr * factor, r.eve_snr * factor, r.eve_count) for r in records]


@dataclass(frozen=True)
class EmpiricalCdf:
    sorted_samples: np.ndarray
    n: int

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        out = np.searchsorted(self.sorted_samples, x_arr, side="right") / self.n
        return float(out) if out.ndim == 0 else out

    eval = __call__

    def sf(self, x):
        return 1.0 - np.asarray(self(x))


def empirical_cdf(samples):
    arr = np.sort(np.asarray(samples, dtype=float).ravel())
    if arr.size == 0:
        raise ValueError("empirical_cdf needs at least one sample")
    return EmpiricalCdf(arr, int(arr.size))


def ks_distance(samples, cdf):
    """sup_x |F_n(x) - F(x)| between the sample's empirical CDF and ``cdf``."""
    ecdf = samples if isinstance(samples, EmpiricalCdf) else empirical_cdf(samples)
    x = ecdf.sorted_samples
    f = np.asarray(cdf(x), dtype=float)
    n = ecdf.n
    # ties: use the last index of each run of equal samples for F_n(x)
    upper = np.searchsorted(x, x, side="right") / n
    lower = np.searchsorted(x, x, side="left") / n
    return float(max(np.max(np.abs(upper - f)), np.max(np.abs(f - lower))))


def mc_secrecy_capacity(records):
    """Mean and standard error of [log2(1+γ_B) - log2(1+γ_E)]⁺ over the records."""
    if not records:
        raise ValueError("mc_secrecy_capacity needs at least one record")
    bob, eve, _ = records_to_arrays(records)
    cs = np.maximum(np.log2(1.0 + bob) - np.log2(1.0 + eve), 0.0)
    stderr = float(np.std(cs, ddof=1) / math.sqrt(cs.size)) if cs.size > 1 else float("nan")
    return float(np.mean(cs)), stderr
