"""Channel realisations and per-trial SNRs for Bob and the UAV eavesdroppers.

Single-antenna mode (K = 1) uses the SNR-optimal RIS phases. Multi-antenna
mode uses i.i.d. uniform RIS phases and MRT at the BS.
"""

from dataclasses import dataclass, replace

import numpy as np

from .geometry import (
    SphericalPoint,
    dist_ris_eve,
    los_steering_bs_arrays,
    los_steering_ris_arrays,
    points_to_arrays,
)


class ModeError(ValueError):
    """Operation called in the wrong antenna mode."""


class DegenerateChannelError(ValueError):
    """Effective channel is identically zero."""


@dataclass(frozen=True)
class EveLink:
    point: SphericalPoint
    v: np.ndarray
    u: np.ndarray


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of every small-scale fading coefficient.

    Attributes:
        h: BS-RIS fading, shape (N, K).
        g: RIS-Bob fading, shape (N,).
        phases: RIS phase shifts, shape (N,).
        eve_r, eve_polar, eve_azimuth: UAV coordinates, shape (M,).
        v: RIS-UAV fading, shape (M, N).
        u: BS-UAV fading, shape (M, K); column 0 is v_{k,0} when K = 1.
    """

    h: np.ndarray
    g: np.ndarray
    phases: np.ndarray
    eve_r: np.ndarray
    eve_polar: np.ndarray
    eve_azimuth: np.ndarray
    v: np.ndarray
    u: np.ndarray

    @property
    def n_ris(self):
        return self.h.shape[0]

    @property
    def n_ant(self):
        return self.h.shape[1]

    @property
    def eve_count(self):
        return len(self.eve_r)

    @property
    def eves(self):
        return [
            EveLink(SphericalPoint(float(r), float(t), float(p)), self.v[k], self.u[k])
            for k, (r, t, p) in enumerate(zip(self.eve_r, self.eve_polar, self.eve_azimuth))
        ]

    def with_phases(self, phases):
        return replace(self, phases=np.asarray(phases, dtype=float))


def complex_normal(rng, shape):
    """i.i.d. CN(0, 1) samples."""
    shape = tuple(np.atleast_1d(shape))
    parts = rng.standard_normal(2 * int(np.prod(shape)))
    parts *= np.sqrt(0.5)
    return parts.view(np.complex128).reshape(shape)


def rician_mix(los, nlos, factor):
    """√(β/(β+1))·LoS + √(1/(β+1))·NLoS; β may be ``inf`` (pure LoS)."""
    if np.isinf(factor):
        return los
    return np.sqrt(factor / (factor + 1.0)) * los + np.sqrt(1.0 / (factor + 1.0)) * nlos


def sample_realization(params, eves, rng):
    """Draw fading for the BS-RIS, RIS-Bob, RIS-UAV and BS-UAV links.

    ``eves`` is a list of :class:`SphericalPoint` or an ``(r, polar, azimuth)``
    tuple of arrays. Phases are left at zero.
    """
    N, K = params.n_ris, params.n_ant
    if isinstance(eves, (list, tuple)) and (not eves or isinstance(eves[0], SphericalPoint)):
        r, polar, azimuth = points_to_arrays(list(eves))
    else:
        r, polar, azimuth = (np.asarray(a, dtype=float) for a in eves)
    M = len(r)
    h = complex_normal(rng, (N, K))
    g = complex_normal(rng, N)
    if M:
        v_los = los_steering_ris_arrays(r, polar, azimuth, params)
        u_los = los_steering_bs_arrays(r, polar, azimuth, params, K)
        v = rician_mix(v_los, complex_normal(rng, (M, N)), params.rician_ris_eve)
        u = rician_mix(u_los, complex_normal(rng, (M, K)), params.rician_bs_eve)
    else:
        v = np.empty((0, N), dtype=complex)
        u = np.empty((0, K), dtype=complex)
    return ChannelRealization(h=h, g=g, phases=np.zeros(N), eve_r=r, eve_polar=polar,
                              eve_azimuth=azimuth, v=v, u=u)


def optimal_phase_shifts(real):
    """φ_i = -∠g_i - ∠h_i (mod 2π), which co-phases every reflected path at Bob."""
    if real.n_ant != 1:
        raise ModeError("optimal phase shifts are defined for a single BS antenna")
    return np.mod(-np.angle(real.g) - np.angle(real.h[:, 0]), 2.0 * np.pi)


def random_phase_shifts(n_ris, rng):
    return rng.uniform(0.0, 2.0 * np.pi, n_ris)


def _require_single(real):
    if real.n_ant != 1:
        raise ModeError(f"single-antenna SNR requested with K = {real.n_ant}")


def bob_snr_single(real, params):
    """ρ (D d_B)^{-α} |Σ g_i h_i e^{jφ_i}|²; equals ρ (D d_B)^{-α} (Σ|g_i||h_i|)² at optimal phases."""
    _require_single(real)
    s = np.sum(real.g * real.h[:, 0] * np.exp(1j * real.phases))
    return float(params.rho_lin * params.bob_pathloss * abs(s) ** 2)


def eve_snrs_single(real, params, far_field=False):
    """SNR at every UAV, shape (M,).

    The reflected path uses the exact RIS-UAV distance unless ``far_field`` is
    set, in which case d_{RIS,E} is replaced by D.
    """
    _require_single(real)
    if real.eve_count == 0:
        return np.empty(0)
    alpha = params.pathloss_exp
    D = params.dist_bs_ris
    if far_field:
        d = np.full(real.eve_count, D)
    else:
        d = dist_ris_eve((real.eve_r, real.eve_polar, real.eve_azimuth), params)
    reflected = real.v @ (real.h[:, 0] * np.exp(1j * real.phases))
    z = (D * d) ** (-alpha / 2) * reflected + real.eve_r ** (-alpha / 2) * real.u[:, 0]
    return params.rho_lin * np.abs(z) ** 2


def eve_snr_single(real, k, params, far_field=False):
    if not 0 <= k < real.eve_count:
        raise IndexError(f"eavesdropper index {k} out of range (M = {real.eve_count})")
    sub = replace(real, eve_r=real.eve_r[k:k + 1], eve_polar=real.eve_polar[k:k + 1],
                  eve_azimuth=real.eve_azimuth[k:k + 1], v=real.v[k:k + 1], u=real.u[k:k + 1])
    return float(eve_snrs_single(sub, params, far_field)[0])


def effective_channel(real):
    """Row vector g^H Φ H of length K."""
    return (np.conj(real.g) * np.exp(1j * real.phases)) @ real.h


def mrt_beamformer(real):
    """w = (g^H Φ H)^H / ‖g^H Φ H‖."""
    eff = effective_channel(real)
    norm = np.linalg.norm(eff)
    if norm == 0.0:
        raise DegenerateChannelError("g^H Φ H is zero; MRT direction undefined")
    return np.conj(eff) / norm


def bob_snr_multi(real, params):
    """ρ (D d_B)^{-α} Σ_j |Σ_i g_i* h_ij e^{jφ_i}|² (MRT gain = ‖g^H Φ H‖²)."""
    eff = effective_channel(real)
    return float(params.rho_lin * params.bob_pathloss * np.vdot(eff, eff).real)


def eve_snrs_multi(real, w, params):
    """ρ |D^{-α} v_k^H Φ H w + r_k^{-α/2} u_k^H w|² for every UAV, shape (M,)."""
    if real.eve_count == 0:
        return np.empty(0)
    alpha = params.pathloss_exp
    Hw = real.h @ w
    reflected = np.conj(real.v) @ (np.exp(1j * real.phases) * Hw)
    direct = np.conj(real.u) @ w
    z = params.dist_bs_ris ** (-alpha) * reflected + real.eve_r ** (-alpha / 2) * direct
    return params.rho_lin * np.abs(z) ** 2


def eve_snr_multi(real, k, w, params):
    if not 0 <= k < real.eve_count:
        raise IndexError(f"eavesdropper index {k} out of range (M = {real.eve_count})")
    sub = replace(real, eve_r=real.eve_r[k:k + 1], eve_polar=real.eve_polar[k:k + 1],
                  eve_azimuth=real.eve_azimuth[k:k + 1], v=real.v[k:k + 1], u=real.u[k:k + 1])
    return float(eve_snrs_multi(sub, w, params)[0])


def _rician_weights(factor):
    """(LoS, NLoS) amplitude weights of :func:`rician_mix`."""
    if np.isinf(factor):
        return 1.0, 0.0
    return np.sqrt(factor / (factor + 1.0)), np.sqrt(1.0 / (factor + 1.0))


def sample_mrt_snrs(params, eves, rng):
    """Bob and per-UAV SNRs for one random-phase MRT draw without forming H.

    The SNRs see H only through g^H Φ H and H w. Writing a = Φ g*,

        g^H Φ H ~ CN(0, ‖a‖² I_K),
        H w = a* ‖g^H Φ H‖ / ‖a‖² + (I - a* a^T / ‖a‖²) n,   n ~ CN(0, I_N),

    since a^T H and the part of H orthogonal to a* are independent. Likewise
    the scattered UAV terms ũ^H w and ṽ^H (Φ H w) are CN(0, 1) and
    CN(0, ‖Φ H w‖²) given the rest. The output therefore has the same law as
    the brute-force path (:func:`sample_realization`, :func:`mrt_beamformer`,
    :func:`bob_snr_multi`, :func:`eve_snrs_multi`) at O(N + K + M) Gaussian
    draws per trial instead of O(NK + M(N + K)).
    """
    N, K = params.n_ris, params.n_ant
    r, polar, azimuth = (np.asarray(x, dtype=float) for x in eves)
    M = len(r)
    g = complex_normal(rng, N)
    phases = random_phase_shifts(N, rng)
    a = np.conj(g) * np.exp(1j * phases)
    a_sq = float(np.vdot(a, a).real)
    eff = np.sqrt(a_sq) * complex_normal(rng, K)
    eff_norm = float(np.linalg.norm(eff))
    if eff_norm == 0.0:
        raise DegenerateChannelError("g^H Φ H is zero; MRT direction undefined")
    bob = float(params.rho_lin * params.bob_pathloss * eff_norm**2)
    if M == 0:
        return bob, np.empty(0)
    w = np.conj(eff) / eff_norm
    n = complex_normal(rng, N)
    y = np.exp(1j * phases) * (np.conj(a) * ((eff_norm - a @ n) / a_sq) + n)
    scatter = complex_normal(rng, (2, M))
    los1, nlos1 = _rician_weights(params.rician_ris_eve)
    los2, nlos2 = _rician_weights(params.rician_bs_eve)
    reflected = nlos1 * np.linalg.norm(y) * scatter[0]
    direct = nlos2 * scatter[1]
    if los1:
        reflected = reflected + los1 * (np.conj(los_steering_ris_arrays(r, polar, azimuth, params)) @ y)
    if los2:
        direct = direct + los2 * (np.conj(los_steering_bs_arrays(r, polar, azimuth, params, K)) @ w)
    alpha = params.pathloss_exp
    z = params.dist_bs_ris ** (-alpha) * reflected + r ** (-alpha / 2) * direct
    return bob, params.rho_lin * np.abs(z) ** 2
