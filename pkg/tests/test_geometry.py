import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ris_secrecy.geometry import (
    SphericalPoint,
    SystemParams,
    dist_ris_eve,
    los_steering_bs,
    los_steering_ris,
    ris_departure_angles,
    sample_ppp_arrays,
    sample_ppp_hemisphere,
)
from ris_secrecy.montecarlo import ks_distance

points = st.builds(
    SphericalPoint,
    r=st.floats(0.0, 50.0),
    polar=st.floats(0.0, math.pi / 2),
    azimuth=st.floats(0.0, 2 * math.pi, exclude_max=True),
)


# ---------------------------------------------------------------- SystemParams


def test_defaults():
    p = SystemParams()
    assert (p.n_ris, p.n_ant, p.radius, p.dist_bs_ris, p.dist_ris_bob) == (100, 200, 50.0, 100.0, 10.0)
    assert (p.ris_rows, p.ris_cols) == (10, 10)
    assert p.rho_lin == pytest.approx(100.0)
    assert p.rician_ris_eve == pytest.approx(10 ** 0.3)
    assert p.spacing_row == pytest.approx(p.wavelength / 4)
    assert p.errors() == []


def test_non_square_grid():
    p = SystemParams(n_ris=12)
    assert p.ris_rows * p.ris_cols == 12
    assert (p.ris_rows, p.ris_cols) == (3, 4)
    assert SystemParams(n_ris=7).errors() == []


def test_updated_rederives_grid():
    p = SystemParams().updated(n_ris=256)
    assert (p.ris_rows, p.ris_cols) == (16, 16)


@pytest.mark.parametrize("change, field", [
    ({"n_ris": 0}, "n_ris"),
    ({"radius": 150.0}, "radius"),
    ({"dist_bs_ris": -1.0}, "dist_bs_ris"),
    ({"eve_density": -1e-4}, "eve_density"),
    ({"pathloss_exp": 0.0}, "pathloss_exp"),
    ({"ris_rows": 3, "ris_cols": 3}, "ris_rows"),
])
def test_invariant_violations(change, field):
    errs = SystemParams().updated(**change).errors()
    assert field in [name for name, _ in errs]


def test_far_ris_message():
    errs = dict(SystemParams(radius=120.0).errors())
    assert "far-RIS" in errs["radius"]
    with pytest.raises(ValueError, match="far-RIS"):
        SystemParams(radius=120.0).check()


def test_with_radius_hold_count():
    p = SystemParams()
    q = p.with_radius(20.0, hold="count")
    assert q.mean_eve_count == pytest.approx(p.mean_eve_count, rel=1e-12)
    assert p.with_radius(20.0).eve_density == p.eve_density
    with pytest.raises(ValueError):
        p.with_radius(20.0, hold="volume")


# ---------------------------------------------------------------- PPP


def test_ppp_zero_density_empty(rng):
    p = SystemParams(eve_density=0.0)
    assert all(sample_ppp_hemisphere(p, rng) == [] for _ in range(50))


def test_ppp_mean_count_at_defaults(rng):
    p = SystemParams()
    counts = np.array([len(sample_ppp_arrays(p, rng)[0]) for _ in range(10_000)])
    expected = 1e-4 * 2 / 3 * math.pi * 50**3
    assert expected == pytest.approx(26.18, abs=0.01)
    se = math.sqrt(expected / counts.size)
    assert abs(counts.mean() - expected) <= 3 * se


def test_ppp_mean_count_1pct_at_1e5(rng):
    p = SystemParams()
    counts = np.array([len(sample_ppp_arrays(p, rng)[0]) for _ in range(100_000)])
    assert counts.mean() == pytest.approx(p.mean_eve_count, rel=0.01)


def test_ppp_points_in_hemisphere(rng):
    p = SystemParams()
    for _ in range(20):
        for pt in sample_ppp_hemisphere(p, rng):
            assert 0 <= pt.r <= p.radius
            assert 0 <= pt.polar <= math.pi / 2
            assert 0 <= pt.azimuth < 2 * math.pi


def test_ppp_radial_law(rng):
    # one dense draw gives ~1e5 points; r/R should follow (r/R)³
    p = SystemParams().updated(eve_density=1e5 / SystemParams().hemisphere_volume)
    r, polar, _ = sample_ppp_arrays(p, rng)
    assert r.size > 90_000
    assert ks_distance(r, lambda x: (np.asarray(x) / p.radius) ** 3) <= 0.01
    # cos(polar) is uniform on [0, 1]
    assert ks_distance(np.cos(polar), lambda x: np.asarray(x)) <= 0.01


# ---------------------------------------------------------------- distances


def test_dist_examples(params):
    assert dist_ris_eve(SphericalPoint(0.0, 0.3, 1.0), params) == pytest.approx(100.0)
    assert dist_ris_eve(SphericalPoint(10.0, math.pi / 2, math.pi / 2), params) == pytest.approx(90.0, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(points)
def test_dist_matches_cartesian_and_bounds(pt):
    p = SystemParams()
    d = dist_ris_eve(pt, p)
    ref = np.linalg.norm(pt.to_cartesian() - np.array([0.0, p.dist_bs_ris, 0.0]))
    assert abs(d - ref) <= 1e-12 * max(1.0, ref)
    assert p.dist_bs_ris - p.radius - 1e-9 <= d <= p.dist_bs_ris + p.radius + 1e-9


def test_dist_vectorised(params, rng):
    r, polar, az = sample_ppp_arrays(params, rng)
    d = dist_ris_eve((r, polar, az), params)
    ref = [dist_ris_eve(SphericalPoint(*x), params) for x in zip(r, polar, az)]
    assert np.allclose(d, ref, rtol=0, atol=1e-12)


# ---------------------------------------------------------------- steering


@settings(max_examples=50, deadline=None)
@given(points)
def test_ris_steering_unit_modulus(pt):
    v = los_steering_ris(pt, SystemParams())
    assert v.shape == (100,)
    assert np.max(np.abs(np.abs(v) - 1.0)) <= 1e-12


def test_ris_steering_single_element(params):
    p = params.updated(n_ris=1)
    pt = SphericalPoint(20.0, 0.7, 2.0)
    v = los_steering_ris(pt, p)
    d = dist_ris_eve(pt, p)
    assert v.shape == (1,)
    assert v[0] == pytest.approx(np.exp(-2j * np.pi * d / p.wavelength), abs=1e-12)


def test_ris_steering_broadside_equal_entries(params):
    # azimuth π/2 puts the UAV in the y-z plane, so sin ξ cos ψ = 0
    pt = SphericalPoint(30.0, 0.8, math.pi / 2)
    xi, psi = ris_departure_angles(pt.r, pt.polar, pt.azimuth, params)
    assert abs(math.sin(xi) * math.cos(psi)) < 1e-12
    v = los_steering_ris(pt, params)
    assert np.allclose(v, v[0], atol=1e-12)


def test_departure_direction_cosine(params):
    pt = SphericalPoint(25.0, 1.1, 0.4)
    xi, psi = ris_departure_angles(pt.r, pt.polar, pt.azimuth, params)
    delta = pt.to_cartesian() - np.array([0.0, params.dist_bs_ris, 0.0])
    assert math.sin(xi) * math.cos(psi) == pytest.approx(delta[0] / np.linalg.norm(delta), abs=1e-12)


def test_bs_steering(params):
    pt = SphericalPoint(12.0, 0.9, 0.3)
    u1 = los_steering_bs(pt, params, 1)
    assert u1[0] == pytest.approx(np.exp(-2j * np.pi * 12.0 / params.wavelength))
    uk = los_steering_bs(pt, params, 8)
    assert uk.shape == (8,)
    assert np.allclose(np.abs(uk), 1.0)
