"""Initial-data families, their moments and spectra.

Fourier transforms use the unnormalized convention

    u_hat(xi) = int exp(-i x.xi) u(x) dx,

so u_hat(0) is the total mass P.  The oscillatory parts split a spectrum as
u_hat = A - iB + P with

    A(xi) = int (cos(x.xi) - 1) u(x) dx,    B(xi) = int sin(x.xi) u(x) dx.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np
from scipy import integrate, optimize, special

from .quadrature import RadialIntegralSpec, radial_integral, sphere_area


@dataclass(frozen=True)
class Moments:
    P: float
    l1: float
    l11: float


@dataclass(frozen=True)
class OscillatoryParts:
    A: np.ndarray
    B: np.ndarray


@dataclass(frozen=True)
class MomentConstants:
    L: float
    M: float
    theta_star: float


class Datum(Protocol):
    n: int

    def moments(self) -> Moments: ...
    def spectrum(self, xi) -> np.ndarray: ...
    def oscillatory_parts(self, xi) -> OscillatoryParts: ...


def _as_xi(xi, n):
    xi = np.asarray(xi, dtype=float)
    if n == 1 and (xi.ndim == 0 or xi.shape[-1] != 1):
        xi = xi[..., None]
    if xi.shape[-1] != n:
        raise ValueError(f"frequency vectors must have last axis {n}, got shape {xi.shape}")
    return xi


def _vector(v, n, name):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.size == 1 and n > 1:
        v = np.concatenate([v, np.zeros(n - 1)])
    if v.shape != (n,):
        raise ValueError(f"{name} must have {n} components")
    return tuple(float(c) for c in v)


def _noncentral_mean_norm(n, center_norm, width):
    """E|c + s Z| for Z standard normal in R^n (noncentral chi mean)."""
    lam2 = (center_norm / width) ** 2
    return (width * math.sqrt(2.0) * math.exp(math.lgamma((n + 1) / 2) - math.lgamma(n / 2))
            * special.hyp1f1(-0.5, n / 2, -0.5 * lam2))


@dataclass(frozen=True)
class Gaussian:
    """amplitude * exp(-|x - center|^2 / (2 width^2))."""

    n: int
    amplitude: float = 1.0
    width: float = 1.0
    center: tuple = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if not self.width > 0:
            raise ValueError("width must be positive")
        object.__setattr__(self, "center", _vector(0.0 if self.center is None else self.center,
                                                   self.n, "center"))

    @property
    def mass_scale(self):
        return (2.0 * math.pi * self.width**2) ** (self.n / 2)

    @property
    def is_radial(self):
        return not any(self.center)

    @property
    def support_radius(self):
        return float(np.linalg.norm(self.center)) + 6.0 * self.width

    def spectral_bound(self):
        """(C, beta) with |u_hat(xi)| <= C exp(-beta |xi|^2)."""
        return abs(self.amplitude) * self.mass_scale, 0.5 * self.width**2

    def moments(self) -> Moments:
        P = self.amplitude * self.mass_scale
        l1 = abs(P)
        mean = _noncentral_mean_norm(self.n, float(np.linalg.norm(self.center)), self.width)
        return Moments(P, l1, l1 * (1.0 + mean))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        d2 = np.sum((x - np.asarray(self.center)) ** 2, axis=-1)
        return self.amplitude * np.exp(-0.5 * d2 / self.width**2)

    def spectrum(self, xi):
        xi = _as_xi(xi, self.n)
        r2 = np.sum(xi * xi, axis=-1)
        phase = xi @ np.asarray(self.center)
        return self.amplitude * self.mass_scale * np.exp(-0.5 * self.width**2 * r2 - 1j * phase)

    def oscillatory_parts(self, xi) -> OscillatoryParts:
        xi = _as_xi(xi, self.n)
        P = self.amplitude * self.mass_scale
        r2 = np.sum(xi * xi, axis=-1)
        phase = xi @ np.asarray(self.center)
        damp = np.expm1(-0.5 * self.width**2 * r2)
        # cos(phase) e^{-s^2 r^2/2} - 1 without cancellation
        A = P * (damp * np.cos(phase) - 2.0 * np.sin(0.5 * phase) ** 2)
        B = P * (1.0 + damp) * np.sin(phase)
        return OscillatoryParts(A, B)

    def marginal(self, y, direction):
        """Integral of u over hyperplanes x.direction = y."""
        shift = float(np.dot(self.center, direction))
        scale = self.amplitude * (2.0 * math.pi * self.width**2) ** ((self.n - 1) / 2)
        return scale * np.exp(-0.5 * (np.asarray(y) - shift) ** 2 / self.width**2)


@functools.lru_cache(maxsize=256)
def _dipole_first_moment(n, s, delta):
    """int |x| |g(x - d) - g(x + d)| dx for a unit-amplitude dipole, |d| = delta."""
    if n == 1:
        return 2.0 * delta * math.sqrt(2.0 * math.pi) * s
    # x = y e + z with e along d; the integrand is even in y
    m = n - 1
    om = sphere_area(m) if m > 1 else 2.0

    def inner(y):
        def f(rho):
            return math.sqrt(y * y + rho * rho) * rho ** (m - 1) * math.exp(-0.5 * rho * rho / s**2)
        return om * integrate.quad(f, 0.0, math.inf, epsabs=0, epsrel=1e-12, limit=200)[0]

    def outer(y):
        diff = math.exp(-0.5 * (y - delta) ** 2 / s**2) - math.exp(-0.5 * (y + delta) ** 2 / s**2)
        return diff * inner(y)

    return 2.0 * integrate.quad(outer, 0.0, math.inf, epsabs=0, epsrel=1e-10, limit=200)[0]


@dataclass(frozen=True)
class Dipole:
    """amplitude * [g(x - separation) - g(x + separation)], g a centered Gaussian."""

    n: int
    amplitude: float = 1.0
    width: float = 1.0
    separation: tuple = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if not self.width > 0:
            raise ValueError("width must be positive")
        sep = _vector(1.0 if self.separation is None else self.separation, self.n, "separation")
        if not any(sep):
            raise ValueError("dipole separation must be nonzero")
        object.__setattr__(self, "separation", sep)

    @property
    def mass_scale(self):
        return (2.0 * math.pi * self.width**2) ** (self.n / 2)

    is_radial = False

    @property
    def support_radius(self):
        return float(np.linalg.norm(self.separation)) + 6.0 * self.width

    def spectral_bound(self):
        return 2.0 * abs(self.amplitude) * self.mass_scale, 0.5 * self.width**2

    def moments(self) -> Moments:
        delta = float(np.linalg.norm(self.separation))
        l1 = 2.0 * abs(self.amplitude) * self.mass_scale * math.erf(delta / (math.sqrt(2.0) * self.width))
        first = _dipole_first_moment(self.n, float(self.width), delta)
        return Moments(0.0, l1, l1 + abs(self.amplitude) * first)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        d = np.asarray(self.separation)
        s2 = self.width**2
        return self.amplitude * (np.exp(-0.5 * np.sum((x - d) ** 2, axis=-1) / s2)
                                 - np.exp(-0.5 * np.sum((x + d) ** 2, axis=-1) / s2))

    def spectrum(self, xi):
        xi = _as_xi(xi, self.n)
        r2 = np.sum(xi * xi, axis=-1)
        phase = xi @ np.asarray(self.separation)
        return -2j * self.amplitude * self.mass_scale * np.exp(-0.5 * self.width**2 * r2) * np.sin(phase)

    def oscillatory_parts(self, xi) -> OscillatoryParts:
        xi = _as_xi(xi, self.n)
        r2 = np.sum(xi * xi, axis=-1)
        phase = xi @ np.asarray(self.separation)
        B = 2.0 * self.amplitude * self.mass_scale * np.exp(-0.5 * self.width**2 * r2) * np.sin(phase)
        return OscillatoryParts(np.zeros_like(B), B)

    def marginal(self, y, direction):
        shift = float(np.dot(self.separation, direction))
        scale = self.amplitude * (2.0 * math.pi * self.width**2) ** ((self.n - 1) / 2)
        y = np.asarray(y)
        s2 = self.width**2
        return scale * (np.exp(-0.5 * (y - shift) ** 2 / s2) - np.exp(-0.5 * (y + shift) ** 2 / s2))


@dataclass(frozen=True)
class Bump:
    """amplitude * (1 - |x|^2 / radius^2)^power on the ball |x| < radius."""

    n: int
    amplitude: float = 1.0
    radius: float = 1.0
    power: int = 2

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if int(self.power) != self.power or self.power < 1:
            raise ValueError("power must be a positive integer")

    is_radial = True

    @property
    def support_radius(self):
        return float(self.radius)

    def spectral_bound(self):
        return None

    @property
    def _order(self):
        return self.n / 2 + self.power

    @property
    def _prefactor(self):
        k = self.power
        return (self.amplitude * self.radius**self.n * (2.0 * math.pi) ** (self.n / 2)
                * 2.0**k * math.gamma(k + 1))

    def mass(self):
        k = self.power
        return (self.amplitude * self.radius**self.n * math.pi ** (self.n / 2)
                * math.exp(math.lgamma(k + 1) - math.lgamma(self.n / 2 + k + 1)))

    def moments(self) -> Moments:
        P = self.mass()
        k, R = self.power, self.radius
        spec = RadialIntegralSpec(
            n=self.n,
            f=lambda r: r * (1.0 - (r / R) ** 2) ** k,
            b=R,
            tol=1e-13,
        )
        first = abs(self.amplitude) * radial_integral(spec).value
        return Moments(P, abs(P), abs(P) + first)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        q = 1.0 - np.sum(x * x, axis=-1) / self.radius**2
        return self.amplitude * np.where(q > 0, np.maximum(q, 0.0) ** self.power, 0.0)

    def _bessel_ratio(self, z, minus_origin=False):
        """J_nu(z)/z^nu, optionally minus its value at z = 0."""
        nu = self._order
        z = np.asarray(z, dtype=float)
        origin = 1.0 / (2.0**nu * math.gamma(nu + 1))
        out = np.empty(z.shape)
        small = z < 1.0
        if np.any(small):
            zs = z[small]
            q = -(0.5 * zs) ** 2
            term = np.full(zs.shape, origin)
            acc = np.zeros(zs.shape) if minus_origin else term.copy()
            for m in range(1, 30):
                term = term * q / (m * (m + nu))
                acc = acc + term
            out[small] = acc
        big = ~small
        if np.any(big):
            zb = z[big]
            out[big] = special.jv(nu, zb) / zb**nu - (origin if minus_origin else 0.0)
        return out

    def spectrum(self, xi):
        xi = _as_xi(xi, self.n)
        z = self.radius * np.linalg.norm(xi, axis=-1)
        return self._prefactor * self._bessel_ratio(z) + 0j

    def oscillatory_parts(self, xi) -> OscillatoryParts:
        xi = _as_xi(xi, self.n)
        z = self.radius * np.linalg.norm(xi, axis=-1)
        A = self._prefactor * self._bessel_ratio(z, minus_origin=True)
        return OscillatoryParts(A, np.zeros_like(A))

    def marginal(self, y, direction):
        n, k, R = self.n, self.power, self.radius
        c = math.pi ** ((n - 1) / 2) * math.exp(math.lgamma(k + 1) - math.lgamma((n + 1) / 2 + k))
        w2 = np.maximum(R * R - np.asarray(y, dtype=float) ** 2, 0.0)
        return self.amplitude * c * w2 ** (k + (n - 1) / 2) / R ** (2 * k)


@dataclass(frozen=True)
class GridSamples:
    """Samples on the periodic grid x_j = -box/2 + j box/N along each axis."""

    n: int
    box: float
    N: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.N,) * self.n:
            raise ValueError(f"expected {self.N}^{self.n} samples, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid samples must be finite")
        object.__setattr__(self, "values", vals)

    is_radial = False

    @property
    def spacing(self):
        return self.box / self.N

    def axis(self):
        return -0.5 * self.box + self.spacing * np.arange(self.N)

    def points(self):
        axes = np.meshgrid(*([self.axis()] * self.n), indexing="ij")
        return np.stack(axes, axis=-1)

    @property
    def support_radius(self):
        pts = self.points()[self.values != 0]
        return float(np.max(np.linalg.norm(pts, axis=-1))) if pts.size else 0.0

    def spectral_bound(self):
        return None

    def moments(self) -> Moments:
        cell = self.spacing**self.n
        u = self.values
        norm = np.linalg.norm(self.points(), axis=-1)
        return Moments(cell * math.fsum(u.ravel()), cell * math.fsum(np.abs(u).ravel()),
                       cell * math.fsum(((1.0 + norm) * np.abs(u)).ravel()))

    def _sums(self, xi, kernels):
        xi = _as_xi(xi, self.n)
        flat = xi.reshape(-1, self.n)
        pts = self.points().reshape(-1, self.n)
        u = self.values.ravel()
        cell = self.spacing**self.n
        outs = [np.empty(flat.shape[0], dtype=complex) for _ in kernels]
        chunk = max(1, 2_000_000 // max(pts.shape[0], 1))
        for s in range(0, flat.shape[0], chunk):
            phase = pts @ flat[s:s + chunk].T
            for out, kern in zip(outs, kernels):
                out[s:s + chunk] = cell * (kern(phase).T @ u)
        return [o.reshape(xi.shape[:-1]) for o in outs]

    def spectrum(self, xi):
        return self._sums(xi, [lambda ph: np.exp(-1j * ph)])[0]

    def oscillatory_parts(self, xi) -> OscillatoryParts:
        A, B = self._sums(xi, [lambda ph: -2.0 * np.sin(0.5 * ph) ** 2, np.sin])
        return OscillatoryParts(A.real, B.real)


def moments(datum) -> Moments:
    return datum.moments()


def spectrum(datum, xi):
    return datum.spectrum(xi)


def oscillatory_parts(datum, xi, method: str = "closed") -> OscillatoryParts:
    """A and B at xi.

    ``method="closed"`` uses the family's closed form; ``"quadrature"``
    integrates the 1-D marginal of u along xi/|xi| against cos - 1 and sin,
    which is independent of the spectrum formula.
    """
    if method == "closed":
        return datum.oscillatory_parts(xi)
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    xi = _as_xi(xi, datum.n)
    flat = xi.reshape(-1, datum.n)
    A = np.empty(flat.shape[0])
    B = np.empty(flat.shape[0])
    reach = datum.support_radius + 2.0
    for i, v in enumerate(flat):
        r = float(np.linalg.norm(v))
        if r == 0.0:
            A[i] = B[i] = 0.0
            continue
        e = v / r
        lo, hi = -reach, reach
        A[i] = integrate.quad(lambda y: -2.0 * math.sin(0.5 * r * y) ** 2 * datum.marginal(y, e),
                              lo, hi, epsabs=1e-12, epsrel=1e-12, limit=500)[0]
        B[i] = integrate.quad(lambda y: math.sin(r * y) * datum.marginal(y, e),
                              lo, hi, epsabs=1e-12, epsrel=1e-12, limit=500)[0]
    return OscillatoryParts(A.reshape(xi.shape[:-1]), B.reshape(xi.shape[:-1]))


def _one_minus_cos_ratio(theta):
    theta = np.asarray(theta, dtype=float)
    return 2.0 * np.sin(0.5 * theta) ** 2 / theta


def lemma22_constants(scan_points: int = 100_001) -> MomentConstants:
    """sup |1 - cos th|/|th| and sup |sin th|/|th|.

    The first supremum sits in (0, 2 pi): beyond 2 pi the ratio is below
    2/(2 pi) < 0.7.  Scan, refine by golden section, then polish the
    stationarity condition tan(th/2) = th by a bracketed root solve.
    """
    grid = np.linspace(1e-6, 2.0 * math.pi, scan_points)
    vals = _one_minus_cos_ratio(grid)
    i = int(np.argmax(vals))
    step = grid[1] - grid[0]
    bracket = (grid[i] - step, grid[i], grid[i] + step)
    res = optimize.minimize_scalar(lambda th: -_one_minus_cos_ratio(th), bracket=bracket,
                                   method="golden", tol=1e-12)
    th = float(res.x)
    # polish: th sin th = 1 - cos th  <=>  th = tan(th/2) on (pi/2, pi)
    th = optimize.brentq(lambda x: x - math.tan(0.5 * x), th - 1e-4, th + 1e-4, xtol=1e-15, rtol=1e-15)
    L = max(float(_one_minus_cos_ratio(th)), float(-res.fun))
    return MomentConstants(L=L, M=1.0, theta_star=th)


def lemma22_check(datum, xi):
    """(|A|/(|xi| l11), |B|/(|xi| l11)); ratios are 0 at xi = 0 by continuity."""
    xi = _as_xi(xi, datum.n)
    parts = datum.oscillatory_parts(xi)
    l11 = datum.moments().l11
    r = np.linalg.norm(xi, axis=-1)
    if l11 == 0:  # zero datum: A = B = 0 everywhere
        return np.zeros(r.shape), np.zeros(r.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        ra = np.where(r > 0, np.abs(parts.A) / (r * l11), 0.0)
        rb = np.where(r > 0, np.abs(parts.B) / (r * l11), 0.0)
    return ra, rb
