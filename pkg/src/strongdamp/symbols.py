"""Fourier-side scalar functions of (t, r = |xi|) for u_tt - Lap u - Lap u_t = 0.

Every mode of the equation obeys  v'' + r^2 v' + r^2 v = 0, whose characteristic
roots are the dispersion roots sigma1, sigma2 of  lam^2 + r^2 lam + r^2 = 0.
The functions here evaluate the solution multipliers of that ODE, the
diffusion-wave profile multipliers, the low-frequency K-term decomposition and
closed-form majorants of the K-term integrals.

All evaluators accept scalars or numpy arrays and broadcast.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .quadrature import gaussian_moment

DEFAULT_DELTA0 = 0.5
CONFLUENCE_TOL = 1e-4
SINC_THRESHOLD = 1e-4
# below this |d| t^2 the 4-term series in d is accurate to ~1e-18
_SERIES_THRESHOLD = 1e-3


class Regime(enum.Enum):
    OSCILLATORY = "oscillatory"
    CONFLUENT = "confluent"
    OVERDAMPED = "overdamped"


@dataclass(frozen=True)
class DispersionRoots:
    sigma1: complex
    sigma2: complex
    regime: Regime


@dataclass(frozen=True)
class ModeMultipliers:
    """Solution multipliers: u_hat(t) = m1 * u1_hat + m0 * u0_hat.

    ``dm1`` and ``dm0`` are the time derivatives.  All four are real.
    """

    m1: np.ndarray
    m0: np.ndarray
    dm1: np.ndarray
    dm0: np.ndarray


@dataclass(frozen=True)
class ProfileMultipliers:
    p_sin: np.ndarray
    p_cos: np.ndarray


@dataclass(frozen=True)
class KTermMajorants:
    """Upper bounds b_j >= int_{|xi|<=delta0} |K_j|^2 dxi, constants explicit.

    b4 and b5 bound the K4, K5 integrals without the P1^2, P0^2 prefactors that
    multiply them in the decomposition; b6 already carries P1^2.
    """

    b1: float
    b2: float
    b3: float
    b4: float
    b5: float
    b6: float

    def as_dict(self) -> dict[str, float]:
        return {f"b{j}": getattr(self, f"b{j}") for j in range(1, 7)}


def _check_nonneg(name, value):
    if np.any(np.asarray(value) < 0):
        raise ValueError(f"{name} must be nonnegative")


def dispersion_roots(r: float, eta: float = CONFLUENCE_TOL) -> DispersionRoots:
    """Roots of lam^2 + r^2 lam + r^2 = 0 with a regime tag.

    sigma1 is the root with the larger real part (the slow one when real).
    """
    r = float(r)
    if not r >= 0 or not math.isfinite(r):
        raise ValueError(f"frequency must be finite and nonnegative, got {r}")
    if abs(r - 2.0) <= eta:
        regime = Regime.CONFLUENT
    elif r < 2.0:
        regime = Regime.OSCILLATORY
    else:
        regime = Regime.OVERDAMPED

    if r <= 2.0:
        half_gap = 0.5 * r * math.sqrt((2.0 - r) * (2.0 + r))
        s1 = complex(-0.5 * r * r, half_gap)
        return DispersionRoots(s1, s1.conjugate(), regime)
    root = math.sqrt((r - 2.0) * (r + 2.0))
    s1 = -2.0 * r / (r + root)
    s2 = -0.5 * r * (r + root)
    return DispersionRoots(complex(s1, 0.0), complex(s2, 0.0), regime)


def _series_sc(d, t):
    """sin(sqrt(d) t)/sqrt(d), cos(sqrt(d) t) as 4-term series in d."""
    x = -d * t * t
    s = t * (1.0 + x / 6.0 * (1.0 + x / 20.0 * (1.0 + x / 42.0)))
    c = 1.0 + x / 2.0 * (1.0 + x / 12.0 * (1.0 + x / 30.0))
    return s, c


def mode_multipliers(t, r, eta: float = CONFLUENCE_TOL) -> ModeMultipliers:
    """Exact multipliers of the mode ODE with data (v0, v1) at time t.

    Uses the trigonometric form for r < 2 - eta, a stable real-exponential
    form for r > 2 + eta and a series in the discriminant around the double
    root r = 2.
    """
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    _check_nonneg("t", t)
    _check_nonneg("r", r)
    t, r = np.broadcast_arrays(t, r)
    r2 = r * r
    a = 0.5 * r2
    m1 = np.empty(t.shape)
    m0 = np.empty(t.shape)
    dm1 = np.empty(t.shape)

    osc = r < 2.0 - eta
    over = r > 2.0 + eta
    conf = ~(osc | over)

    if np.any(osc):
        tt, rr, aa = t[osc], r[osc], a[osc]
        w = 0.5 * rr * np.sqrt((2.0 - rr) * (2.0 + rr))
        env = np.exp(-aa * tt)
        s = tt * np.sinc(w * tt / np.pi)  # sin(w t)/w, equals t at w = 0
        c = np.cos(w * tt)
        m1[osc] = env * s
        m0[osc] = env * (c + aa * s)
        dm1[osc] = env * (c - aa * s)

    if np.any(over):
        tt, rr, aa = t[over], r[over], a[over]
        root = np.sqrt((rr - 2.0) * (rr + 2.0))
        s1 = -2.0 * rr / (rr + root)
        s2 = -0.5 * rr * (rr + root)
        gap = s1 - s2  # 2 kappa > 0
        e1 = np.exp(s1 * tt)
        q = np.exp(-gap * tt)  # e^{(s2 - s1) t}
        m1[over] = e1 * (-np.expm1(-gap * tt)) / gap
        m0[over] = e1 * (s1 * q - s2) / gap
        dm1[over] = e1 * (s1 - s2 * q) / gap

    if np.any(conf):
        tt, rr, aa = t[conf], r[conf], a[conf]
        d = 0.25 * rr * rr * (2.0 - rr) * (2.0 + rr)  # squared half-gap, signed
        env = np.exp(-aa * tt)
        s = np.empty(tt.shape)
        c = np.empty(tt.shape)
        small = np.abs(d) * tt * tt < _SERIES_THRESHOLD
        s[small], c[small] = _series_sc(d[small], tt[small])
        big = ~small
        if np.any(big):
            db, tb = d[big], tt[big]
            k = np.sqrt(np.abs(db))
            x = k * tb
            pos = db > 0
            s[big] = np.where(pos, np.sin(x), np.sinh(x)) / k
            c[big] = np.where(pos, np.cos(x), np.cosh(x))
        m1[conf] = env * s
        m0[conf] = env * (c + aa * s)
        dm1[conf] = env * (c - aa * s)

    dm0 = -r2 * m1
    return ModeMultipliers(m1, m0, dm1, dm0)


def exponential_form_multipliers(t, r):
    """The multipliers written directly with complex exponentials of the roots.

    Independent of :func:`mode_multipliers`; only valid for 0 < r, r != 2.
    Returns complex arrays (m1, m0, dm1, dm0).
    """
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=complex)
    disc = np.sqrt(r * r * (4.0 - r * r))  # principal branch: i*|.| for r > 2
    s1 = 0.5 * (-r * r + 1j * disc)
    s2 = 0.5 * (-r * r - 1j * disc)
    e1 = np.exp(s1 * t)
    e2 = np.exp(s2 * t)
    gap = s1 - s2
    m1 = (e1 - e2) / gap
    m0 = (s1 * e2 - s2 * e1) / gap
    dm1 = (s1 * e1 - s2 * e2) / gap
    dm0 = s1 * s2 * (e2 - e1) / gap
    return m1, m0, dm1, dm0


def sinc_times(t, r):
    """sin(t r)/r with the removable singularity at r = 0 filled in."""
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    x = t * r
    taylor = t * (1.0 - x * x / 6.0 * (1.0 - x * x / 20.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.sin(x) / r
    return np.where(x < SINC_THRESHOLD, taylor, direct)


def profile_multipliers(t, r) -> ProfileMultipliers:
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    _check_nonneg("t", t)
    _check_nonneg("r", r)
    env = np.exp(-0.5 * t * r * r)
    return ProfileMultipliers(env * sinc_times(t, r), env * np.cos(t * r))


def _radius(xi):
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 0:
        return np.abs(xi)
    return np.linalg.norm(xi, axis=-1)


def _low_freq_radius(xi):
    r = _radius(xi)
    if np.any(r >= 2.0):
        raise ValueError("K-term decomposition needs |xi| < 2")
    return r


def k_terms_explicit(t, xi, P0, P1, A0, B0, A1, B1):
    """K1, K2, K3 of the low-frequency decomposition at (t, xi).

    ``xi`` is a vector (last axis = dimension) or a scalar radius.  ``P1`` is
    accepted for signature symmetry with the decomposition; K1..K3 do not use it.
    """
    r = _low_freq_radius(xi)
    t = np.asarray(t, dtype=float)
    mm = mode_multipliers(t, r)
    root = np.sqrt((2.0 - r) * (2.0 + r))
    w = 0.5 * r * root
    k1 = P0 * r * np.exp(-0.5 * t * r * r) * np.sin(w * t) / root
    k2 = (A1 - 1j * B1) * mm.m1
    k3 = (A0 - 1j * B0) * mm.m0
    return k1 + 0j, k2, k3


def decomposition_residual(t, xi, u0_hat, u1_hat, P0, P1, A0, B0, A1, B1):
    """u_hat(t, xi) minus the explicit low-frequency decomposition; zero exactly."""
    r = _low_freq_radius(xi)
    if np.any(r <= 0):
        raise ValueError("decomposition is stated for 0 < |xi|")
    t = np.asarray(t, dtype=float)
    mm = mode_multipliers(t, r)
    u_hat = mm.m1 * u1_hat + mm.m0 * u0_hat
    root = np.sqrt((2.0 - r) * (2.0 + r))
    phase = 0.5 * t * r * root
    env = np.exp(-0.5 * t * r * r)
    lead = 2.0 * P1 * env * np.sin(phase) / (r * root) + P0 * env * np.cos(phase)
    k1, k2, k3 = k_terms_explicit(t, xi, P0, P1, A0, B0, A1, B1)
    return u_hat - (lead + k1 + k2 + k3)


def low_freq_error_integrand(t, r, u0_hat, u1_hat, P0, P1):
    """|u_hat(t, xi) - profile(t, xi)|^2 for spectra sampled at radius r."""
    mm = mode_multipliers(t, r)
    pm = profile_multipliers(t, r)
    diff = mm.m1 * u1_hat + mm.m0 * u0_hat - (P1 * pm.p_sin + P0 * pm.p_cos)
    return np.abs(diff) ** 2


def hf_energy(t, r, u0_hat, u1_hat):
    """Mode energy |v_t|^2 + r^2 |v|^2 at time t."""
    mm = mode_multipliers(t, r)
    r = np.asarray(r, dtype=float)
    v = mm.m1 * u1_hat + mm.m0 * u0_hat
    vt = mm.dm1 * u1_hat + mm.dm0 * u0_hat
    return np.abs(vt) ** 2 + r * r * np.abs(v) ** 2


def k_majorants(t, n, delta0, P0, P1, norm11_u0, norm11_u1, L, M) -> KTermMajorants:
    """Closed-form majorants of the K-term integrals over the ball |xi| <= delta0.

    Constants come from the elementary bounds used term by term:
    |sin| <= 1, 4 - |xi|^2 >= 4 - delta0^2, |sqrt(4-r^2) - 2| <= r^2, the moment
    bounds |A| <= L r ||u||_{1,1}, |B| <= M r ||u||_{1,1}, and for K3 the
    Cauchy-Schwarz bound (c sin + cos)^2 <= 1 + c^2.
    """
    if not 0.0 < delta0 < 2.0:
        raise ValueError(f"delta0 must lie in (0, 2), got {delta0}")
    if t <= 0:
        raise ValueError("t must be positive")
    gap = 4.0 - delta0 * delta0

    def J(two_k):
        return gaussian_moment(two_k // 2, t, n, delta0)

    j0, j2, j4, j6 = J(0), J(2), J(4), J(6)
    lm = L * L + M * M
    return KTermMajorants(
        b1=P0 * P0 / gap * j2,
        b2=lm * norm11_u1**2 * (4.0 / gap) * j0,
        b3=lm * norm11_u0**2 * (j4 / gap + j2),
        b4=t * t / gap * j4,
        b5=t * t / 4.0 * j6,
        b6=4.0 * P1 * P1 / gap**3 * j2,
    )
