"""BS-centred hemisphere geometry, PPP sampling of UAV positions, steering vectors.

Coordinates: BS at the origin, ground plane z = 0, UAVs in the upper
hemisphere of radius R. The RIS sits at (0, D, 0) in the x-z plane with its
normal pointing back at the BS (-y); RIS rows run along x.
"""

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


def _ris_grid(n):
    """Split ``n`` elements into the most square (rows, cols) grid."""
    rows = int(math.isqrt(n))
    while rows > 1 and n % rows:
        rows -= 1
    return rows, n // rows


@dataclass(frozen=True)
class SystemParams:
    """Scalar system constants.

    ``rho_db`` is the normalised transmit SNR P/σ₀² in dB; the Rician factors
    are linear (3 dB by default). Spacings default to λ/4 and the RIS grid to
    the most square factorisation of ``n_ris``.
    """

    n_ris: int = 100
    n_ant: int = 200
    dist_bs_ris: float = 100.0
    dist_ris_bob: float = 10.0
    radius: float = 50.0
    pathloss_exp: float = 2.0
    rho_db: float = 20.0
    eve_density: float = 1e-4
    rician_ris_eve: float = 10 ** 0.3
    rician_bs_eve: float = 10 ** 0.3
    carrier_hz: float = 2.4e9
    spacing_row: float = field(default=None)
    spacing_col: float = field(default=None)
    ris_rows: int = field(default=None)
    ris_cols: int = field(default=None)

    def __post_init__(self):
        if self.carrier_hz and self.carrier_hz > 0:
            quarter = SPEED_OF_LIGHT / self.carrier_hz / 4.0
            if self.spacing_row is None:
                object.__setattr__(self, "spacing_row", quarter)
            if self.spacing_col is None:
                object.__setattr__(self, "spacing_col", quarter)
        if isinstance(self.n_ris, int) and self.n_ris >= 1:
            if self.ris_rows is None and self.ris_cols is None:
                rows, cols = _ris_grid(self.n_ris)
                object.__setattr__(self, "ris_rows", rows)
                object.__setattr__(self, "ris_cols", cols)
            elif self.ris_rows is None and self.ris_cols:
                object.__setattr__(self, "ris_rows", self.n_ris // self.ris_cols)
            elif self.ris_cols is None and self.ris_rows:
                object.__setattr__(self, "ris_cols", self.n_ris // self.ris_rows)

    def errors(self):
        """Return every invariant violation as ``(field, message)`` pairs."""
        errs = []
        for name in ("n_ris", "n_ant", "ris_rows", "ris_cols"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
                errs.append((name, f"must be a positive integer, got {value!r}"))
        positive = ("dist_bs_ris", "dist_ris_bob", "radius", "pathloss_exp",
                    "carrier_hz", "spacing_row", "spacing_col")
        for name in positive:
            value = getattr(self, name)
            if value is None or not math.isfinite(value) or value <= 0:
                errs.append((name, f"must be finite and > 0, got {value!r}"))
        for name in ("eve_density", "rician_ris_eve", "rician_bs_eve"):
            value = getattr(self, name)
            if value is None or not math.isfinite(value) or value < 0:
                errs.append((name, f"must be finite and >= 0, got {value!r}"))
        if not math.isfinite(self.rho_db):
            errs.append(("rho_db", f"must be finite, got {self.rho_db!r}"))
        bad = {name for name, _ in errs}
        if not bad & {"n_ris", "ris_rows", "ris_cols"}:
            if self.ris_rows * self.ris_cols != self.n_ris:
                errs.append(("ris_rows", f"ris_rows x ris_cols = {self.ris_rows}x{self.ris_cols} "
                                         f"does not equal n_ris = {self.n_ris}"))
        if not bad & {"radius", "dist_bs_ris"} and self.radius >= self.dist_bs_ris:
            errs.append(("radius", f"far-RIS regime requires radius < dist_bs_ris "
                                   f"({self.radius} >= {self.dist_bs_ris})"))
        return errs

    def check(self):
        errs = self.errors()
        if errs:
            raise ValueError("; ".join(f"{k}: {m}" for k, m in errs))
        return self

    @property
    def rho_lin(self):
        return 10.0 ** (self.rho_db / 10.0)

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def hemisphere_volume(self):
        return 2.0 / 3.0 * math.pi * self.radius**3

    @property
    def mean_eve_count(self):
        return self.eve_density * self.hemisphere_volume

    @property
    def bob_pathloss(self):
        """(D d_B)^{-α}."""
        return (self.dist_bs_ris * self.dist_ris_bob) ** (-self.pathloss_exp)

    def updated(self, **changes):
        """Copy with ``changes``; the RIS grid and spacings are re-derived unless given."""
        if "n_ris" in changes and "ris_rows" not in changes and "ris_cols" not in changes:
            changes.update(ris_rows=None, ris_cols=None)
        if "carrier_hz" in changes:
            changes.setdefault("spacing_row", None)
            changes.setdefault("spacing_col", None)
        return replace(self, **changes)

    def with_radius(self, radius, hold="density"):
        """Change R, keeping either the density or the mean UAV count fixed."""
        if hold == "density":
            return self.updated(radius=radius)
        if hold == "count":
            count = self.mean_eve_count
            new = self.updated(radius=radius)
            return new.updated(eve_density=count / new.hemisphere_volume)
        raise ValueError(f"hold must be 'density' or 'count', got {hold!r}")

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class SphericalPoint:
    """UAV position: radius r, polar angle from +z, azimuth from +x."""

    r: float
    polar: float
    azimuth: float

    def to_cartesian(self):
        s = math.sin(self.polar)
        return np.array([self.r * s * math.cos(self.azimuth),
                         self.r * s * math.sin(self.azimuth),
                         self.r * math.cos(self.polar)])


def sample_ppp_arrays(params, rng):
    """Draw one PPP realisation as ``(r, polar, azimuth)`` arrays."""
    count = rng.poisson(params.mean_eve_count) if params.eve_density > 0 else 0
    u = rng.random((3, count))
    # 1 - U keeps r strictly positive
    r = params.radius * np.cbrt(1.0 - u[0])
    polar = np.arccos(u[1])
    azimuth = 2.0 * np.pi * u[2]
    return r, polar, azimuth


def sample_ppp_hemisphere(params, rng):
    """Homogeneous PPP of intensity ``eve_density`` in the upper hemisphere."""
    r, polar, azimuth = sample_ppp_arrays(params, rng)
    return [SphericalPoint(float(a), float(b), float(c)) for a, b, c in zip(r, polar, azimuth)]


def points_to_arrays(points):
    if not points:
        return np.empty(0), np.empty(0), np.empty(0)
    arr = np.array([(p.r, p.polar, p.azimuth) for p in points], dtype=float)
    return arr[:, 0], arr[:, 1], arr[:, 2]


def dist_ris_eve(p, params):
    """Distance between the RIS at (0, D, 0) and a UAV.

    Accepts a :class:`SphericalPoint` or an ``(r, polar, azimuth)`` tuple of arrays.
    """
    if isinstance(p, SphericalPoint):
        r, polar, azimuth = p.r, p.polar, p.azimuth
    else:
        r, polar, azimuth = (np.asarray(v, dtype=float) for v in p)
    D = params.dist_bs_ris
    sq = r**2 + D**2 - 2.0 * r * D * np.sin(polar) * np.sin(azimuth)
    out = np.sqrt(np.maximum(sq, 0.0))
    return float(out) if np.ndim(out) == 0 else out


def ris_departure_angles(r, polar, azimuth, params):
    """Azimuth ξ (from the RIS normal, in the horizontal plane) and elevation ψ.

    With this convention sin ξ cos ψ is the direction cosine along the RIS
    rows (the x-axis).
    """
    r = np.asarray(r, dtype=float)
    s = np.sin(polar)
    dx = r * s * np.cos(azimuth)
    dy = r * s * np.sin(azimuth) - params.dist_bs_ris
    dz = r * np.cos(polar)
    xi = np.arctan2(dx, -dy)
    psi = np.arctan2(dz, np.hypot(dx, dy))
    return xi, psi


def los_steering_ris_arrays(r, polar, azimuth, params):
    """LoS RIS-to-UAV vectors for many UAVs at once, shape (M, N)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    polar = np.atleast_1d(np.asarray(polar, dtype=float))
    azimuth = np.atleast_1d(np.asarray(azimuth, dtype=float))
    lam = params.wavelength
    d = dist_ris_eve((r, polar, azimuth), params)
    xi, psi = ris_departure_angles(r, polar, azimuth, params)
    u = np.sin(xi) * np.cos(psi)
    m = np.arange(params.ris_rows)
    n = np.arange(params.ris_cols)
    row = np.exp(-2j * np.pi * np.outer(u, m) * params.spacing_row / lam)
    col = np.exp(-2j * np.pi * np.outer(u, n) * params.spacing_col / lam)
    kron = (row[:, :, None] * col[:, None, :]).reshape(len(r), -1)
    return np.exp(-2j * np.pi * d / lam)[:, None] * kron


def los_steering_ris(p, params):
    """LoS vector v̄ from the RIS to one UAV, length N, unit-modulus entries."""
    return los_steering_ris_arrays([p.r], [p.polar], [p.azimuth], params)[0]


def los_steering_bs_arrays(r, polar, azimuth, params, n_ant):
    """LoS BS-to-UAV vectors, shape (M, K).

    The BS array is a λ/2 ULA along x; for K = 1 this reduces to e^{-j2πr/λ}.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    polar = np.atleast_1d(np.asarray(polar, dtype=float))
    azimuth = np.atleast_1d(np.asarray(azimuth, dtype=float))
    lam = params.wavelength
    cos_x = np.sin(polar) * np.cos(azimuth)
    # successive powers of the per-element phase step; cheaper than M*K complex exps
    ula = np.ones((len(r), n_ant), dtype=complex)
    if n_ant > 1:
        step = np.exp(-1j * np.pi * cos_x)
        ula[:, 1:] = np.cumprod(np.broadcast_to(step[:, None], (len(r), n_ant - 1)), axis=1)
    return np.exp(-2j * np.pi * r / lam)[:, None] * ula


def los_steering_bs(p, params, n_ant=1):
    return los_steering_bs_arrays([p.r], [p.polar], [p.azimuth], params, n_ant)[0]
