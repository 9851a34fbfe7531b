"""Special functions: gamma family, first-order Marcum-Q, Gauss-Chebyshev nodes.

Everything here is vectorised over numpy arrays; scalar inputs give Python
floats back. Incomplete gammas use the usual split: power series for
``z < s + 1`` and a Lentz continued fraction otherwise.
"""

import math
from dataclasses import dataclass

import numpy as np

_EPS = 4.0 * np.finfo(float).eps
_FPMIN = 1e-300
_MAX_ITER = 100_000

_lgamma = np.frompyfunc(math.lgamma, 1, 1)


@dataclass(frozen=True)
class Truncation:
    """Series truncation order ``n_bar`` and Gauss-Chebyshev node count ``w_nodes``."""

    n_bar: int = 10
    w_nodes: int = 20

    def __post_init__(self):
        if int(self.n_bar) != self.n_bar or self.n_bar < 0:
            raise ValueError(f"n_bar must be a non-negative integer, got {self.n_bar!r}")
        if int(self.w_nodes) != self.w_nodes or self.w_nodes < 1:
            raise ValueError(f"w_nodes must be a positive integer, got {self.w_nodes!r}")


def _as_output(value, scalar):
    return float(value) if scalar else value


def log_gamma(s):
    """ln Γ(s) for s > 0 (vectorised)."""
    arr = np.asarray(s, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError("log_gamma requires finite s > 0")
    out = np.asarray(_lgamma(arr), dtype=float)
    return _as_output(out, np.ndim(s) == 0)


def gamma_fn(s):
    """Γ(s) for finite s > 0.

    Raises ``OverflowError`` once Γ(s) exceeds the double range (s > ~171.6);
    use :func:`log_gamma` there.
    """
    if not np.isscalar(s):
        arr = np.asarray(s, dtype=float)
        return np.array([gamma_fn(float(v)) for v in arr.ravel()]).reshape(arr.shape)
    if not math.isfinite(s) or s <= 0:
        raise ValueError(f"gamma_fn requires finite s > 0, got {s!r}")
    return math.gamma(s)


def _check_sz(s, z):
    s_arr = np.asarray(s, dtype=float)
    z_arr = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(s_arr)) or np.any(s_arr <= 0):
        raise ValueError("incomplete gamma requires finite s > 0")
    if np.any(np.isnan(z_arr)) or np.any(z_arr < 0):
        raise ValueError("incomplete gamma requires z >= 0")
    s_b, z_b = np.broadcast_arrays(s_arr, z_arr)
    return s_b.astype(float), z_b.astype(float)


def _series_p(s, z):
    """Regularised lower gamma P(s, z) by the power series (z < s + 1)."""
    ap = s.copy()
    term = 1.0 / s
    total = term.copy()
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= z / ap
        total += term
        if np.all(np.abs(term) <= np.abs(total) * _EPS):
            break
    with np.errstate(divide="ignore"):
        log_pref = -z + s * np.log(z) - _lgamma(s).astype(float)
    return total * np.exp(log_pref)


def _contfrac_q(s, z):
    """Regularised upper gamma Q(s, z) by modified Lentz (z >= s + 1)."""
    b = z + 1.0 - s
    c = np.full_like(z, 1.0 / _FPMIN)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, _MAX_ITER):
        an = -i * (i - s)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = b + an / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) <= _EPS):
            break
    log_pref = -z + s * np.log(z) - _lgamma(s).astype(float)
    return np.exp(log_pref) * h


def _reg_pq(s, z):
    s_b, z_b = _check_sz(s, z)
    p = np.empty_like(z_b)
    q = np.empty_like(z_b)
    inf = np.isinf(z_b)
    ser = (z_b < s_b + 1.0) & ~inf
    cf = ~ser & ~inf
    if np.any(ser):
        p_ser = np.clip(_series_p(s_b[ser], z_b[ser]), 0.0, 1.0)
        p[ser] = p_ser
        q[ser] = 1.0 - p_ser
    if np.any(cf):
        q_cf = np.clip(_contfrac_q(s_b[cf], z_b[cf]), 0.0, 1.0)
        q[cf] = q_cf
        p[cf] = 1.0 - q_cf
    p[inf] = 1.0
    q[inf] = 0.0
    return p, q


def reg_lower_inc_gamma(s, z):
    """P(s, z) = γ(s, z) / Γ(s)."""
    scalar = np.ndim(s) == 0 and np.ndim(z) == 0
    return _as_output(_reg_pq(s, z)[0], scalar)


def reg_upper_inc_gamma(s, z):
    """Q(s, z) = Γ(s, z) / Γ(s), computed directly (no 1 - P cancellation in the tail)."""
    scalar = np.ndim(s) == 0 and np.ndim(z) == 0
    return _as_output(_reg_pq(s, z)[1], scalar)


def lower_inc_gamma(s, z):
    """γ(s, z) = ∫_0^z e^{-t} t^{s-1} dt."""
    scalar = np.ndim(s) == 0 and np.ndim(z) == 0
    p, _ = _reg_pq(s, z)
    s_b = np.broadcast_to(np.asarray(s, dtype=float), p.shape)
    return _as_output(p * np.exp(np.asarray(_lgamma(s_b), dtype=float)), scalar)


def upper_inc_gamma(s, z):
    """Γ(s, z) = ∫_z^∞ e^{-t} t^{s-1} dt."""
    scalar = np.ndim(s) == 0 and np.ndim(z) == 0
    _, q = _reg_pq(s, z)
    s_b = np.broadcast_to(np.asarray(s, dtype=float), q.shape)
    return _as_output(q * np.exp(np.asarray(_lgamma(s_b), dtype=float)), scalar)


def binomial(n, k):
    """C(n, k) for non-negative integers."""
    return math.comb(n, k)


def marcum_q1_tail_bound(a, n_bar):
    """Upper bound on the error of :func:`marcum_q1` truncated after ``n_bar``.

    Each dropped term is a Poisson(a²/2) weight times Q(n+1, ·) ≤ 1, so the
    error is at most the Poisson upper tail P(N > n_bar) = P(n_bar + 1, a²/2).
    """
    a_arr = np.asarray(a, dtype=float)
    if np.any(a_arr < 0):
        raise ValueError("marcum_q1_tail_bound requires a >= 0")
    lam = 0.5 * a_arr**2
    bound = np.where(lam > 0, reg_lower_inc_gamma(n_bar + 1.0, np.maximum(lam, 0.0)), 0.0)
    return _as_output(bound, np.ndim(a) == 0)


def marcum_q1(a, b, trunc=None, tol=1e-15):
    """First-order Marcum-Q function Q₁(a, b).

    Evaluated with the Poisson-mixture series

        Q₁(a, b) = Σ_n e^{-a²/2} (a²/2)^n / n! · Γ(n+1, b²/2) / n!

    where Γ(n+1, y)/n! is the Poisson CDF e^{-y} Σ_{k≤n} y^k/k!.

    With ``trunc`` given the sum stops hard at ``n = trunc.n_bar``; the error is
    then bounded by :func:`marcum_q1_tail_bound`. Without it, summation runs
    until the neglected Poisson weight is below ``tol``.
    """
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    if np.any(np.isnan(a_arr)) or np.any(np.isnan(b_arr)):
        raise ValueError("marcum_q1 arguments must not be NaN")
    if np.any(a_arr < 0) or np.any(b_arr < 0):
        raise ValueError("marcum_q1 requires a >= 0 and b >= 0")
    scalar = np.ndim(a) == 0 and np.ndim(b) == 0
    a_b, b_b = np.broadcast_arrays(a_arr, b_arr)
    lam = 0.5 * a_b**2
    y = 0.5 * b_b**2

    if trunc is not None:
        n_max = int(trunc.n_bar)
    else:
        lam_max = float(np.max(lam)) if lam.size else 0.0
        n_max = int(math.ceil(lam_max + 12.0 * math.sqrt(lam_max) + 40.0))

    with np.errstate(divide="ignore", invalid="ignore"):
        log_lam = np.log(lam)
        log_y = np.log(y)
    total = np.zeros_like(lam)
    poisson_cdf_y = np.zeros_like(y)
    weight_sum = np.zeros_like(lam)
    for n in range(n_max + 1):
        lg = math.lgamma(n + 1.0)
        if n == 0:
            w = np.exp(-lam)
            p_y = np.exp(-y)
        else:
            with np.errstate(invalid="ignore"):
                w = np.where(lam > 0, np.exp(-lam + n * log_lam - lg), 0.0)
                p_y = np.where(y > 0, np.exp(-y + n * log_y - lg), 0.0)
        poisson_cdf_y = poisson_cdf_y + p_y
        total = total + w * np.minimum(poisson_cdf_y, 1.0)
        weight_sum = weight_sum + w
        if trunc is None and n >= lam_max and np.all(1.0 - weight_sum <= tol):
            break
    # Q₁(a, ∞) = 0 and Q₁(a, 0) = 1 exactly
    total = np.where(np.isinf(y), 0.0, total)
    total = np.where(y == 0, 1.0, total)
    return _as_output(np.clip(total, 0.0, 1.0), scalar)


def gauss_chebyshev_nodes(W):
    """Chebyshev-Gauss (first kind) nodes t_j = cos((2j-1)π/2W) and factors √(1 - t_j²).

    Returns two arrays ``(t, sqrt_factor)`` of length W.
    """
    if int(W) != W or W < 1:
        raise ValueError(f"W must be a positive integer, got {W!r}")
    j = np.arange(1, int(W) + 1)
    angle = (2 * j - 1) * np.pi / (2 * W)
    t = np.cos(angle)
    t[np.abs(t) < 1e-15] = 0.0
    # sin(angle) == sqrt(1 - cos²) without cancellation near ±1
    return t, np.sin(angle)


def gauss_chebyshev_integrate(f, W):
    """Approximate ∫_{-1}^{1} f(t) dt by (π/W) Σ f(t_j) √(1 - t_j²).

    ``f`` must accept a numpy array of nodes.
    """
    t, factor = gauss_chebyshev_nodes(W)
    return float(np.pi / W * np.sum(np.asarray(f(t), dtype=float) * factor))
