"""Physical-space diffusion-wave profiles for n = 2, 3.

The free wave propagator w (w(0) = 0, w_t(0) = delta) acts on smooth h by
spherical means in R^3 and by weighted disk means in R^2:

    n = 3:  (w * h)(t, x)   = a0 t  int_{|z|=1} h(x + t z) dS_z
            (w_t * h)(t, x) = b0    int_{|z|=1} h(x + t z) dS_z
                              + b1 t int_{|z|=1} z . grad h(x + t z) dS_z
    n = 2:  same with  int_{|z|<=1} (...) / sqrt(1 - |z|^2) dz.

The profile  F^{-1}(e^{-t|xi|^2/2} [P1 sin(t|xi|)/|xi| + P0 cos(t|xi|)])  is
P1 (w * G) + P0 (w_t * G) with the Gaussian kernel G(t, .) = F^{-1}(e^{-t|xi|^2/2}).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SurfaceRule:
    """Nodes z (K, n) and weights (K,) for int f(z) dmu(z).

    ``sphere_rule`` integrates over |z| = 1 against surface measure;
    ``disk_rule`` integrates over |z| <= 1 against dz / sqrt(1 - |z|^2).
    The first coordinate axis is the pole; callers rotate it into place.
    """

    nodes: np.ndarray
    weights: np.ndarray


def sphere_rule(n_polar: int = 96, n_azimuth: int = 16) -> SurfaceRule:
    """Gauss-Legendre in cos(polar angle) times trapezoid in azimuth on S^2."""
    u, wu = np.polynomial.legendre.leggauss(n_polar)
    phi = 2.0 * math.pi * np.arange(n_azimuth) / n_azimuth
    uu, pp = np.meshgrid(u, phi, indexing="ij")
    s = np.sqrt(1.0 - uu**2)
    nodes = np.stack([uu, s * np.cos(pp), s * np.sin(pp)], axis=-1).reshape(-1, 3)
    weights = (wu[:, None] * np.full(n_azimuth, 2.0 * math.pi / n_azimuth)[None, :]).ravel()
    return SurfaceRule(nodes, weights)


def disk_rule(n_radial: int = 96, n_azimuth: int = 128) -> SurfaceRule:
    """Weighted unit-disk rule; rho = sin(psi) absorbs the 1/sqrt(1 - rho^2) weight."""
    x, wx = np.polynomial.legendre.leggauss(n_radial)
    psi = 0.25 * math.pi * (x + 1.0)
    wpsi = 0.25 * math.pi * wx
    rho = np.sin(psi)
    phi = 2.0 * math.pi * np.arange(n_azimuth) / n_azimuth
    rr, pp = np.meshgrid(rho, phi, indexing="ij")
    nodes = np.stack([rr * np.cos(pp), rr * np.sin(pp)], axis=-1).reshape(-1, 2)
    weights = ((wpsi * rho)[:, None] * np.full(n_azimuth, 2.0 * math.pi / n_azimuth)[None, :]).ravel()
    return SurfaceRule(nodes, weights)


def direction_rule(n: int, size: int = 64) -> SurfaceRule:
    """Unit directions with weights summing to one (angular average on S^{n-1})."""
    if n == 1:
        return SurfaceRule(np.array([[1.0], [-1.0]]), np.array([0.5, 0.5]))
    if n == 2:
        phi = 2.0 * math.pi * np.arange(size) / size
        return SurfaceRule(np.stack([np.cos(phi), np.sin(phi)], axis=-1), np.full(size, 1.0 / size))
    if n == 3:
        rule = sphere_rule(max(size // 4, 4), max(size // 2, 4))
        return SurfaceRule(rule.nodes, rule.weights / (4.0 * math.pi))
    raise ValueError(f"unsupported dimension {n}")


def _frames(axes, n):
    """Orthonormal frames (m, n, n) whose first row is the given axis."""
    axes = np.asarray(axes, dtype=float)
    norm = np.linalg.norm(axes, axis=-1, keepdims=True)
    e1 = np.where(norm > 0, axes / np.where(norm > 0, norm, 1.0), np.eye(n)[0])
    if n == 2:
        e2 = np.stack([-e1[:, 1], e1[:, 0]], axis=-1)
        return np.stack([e1, e2], axis=1)
    helper = np.where(np.abs(e1[:, :1]) < 0.9, np.eye(3)[0], np.eye(3)[1])
    e2 = np.cross(e1, helper)
    e2 /= np.linalg.norm(e2, axis=-1, keepdims=True)
    e3 = np.cross(e1, e2)
    return np.stack([e1, e2, e3], axis=1)


def surface_means(fields, x, t, rule: SurfaceRule, axis=None, chunk_nodes: int = 1_000_000):
    """Apply ``rule`` to callables of (z, y = x + t z) at each point of x.

    ``fields`` is a sequence of callables f(z, y) -> array; returns one array
    of shape x.shape[:-1] per callable.  The rule's pole is aligned with
    ``axis`` (a fixed vector) or, when ``axis`` is None, with each x itself.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    flat = x.reshape(-1, n)
    m = flat.shape[0]
    outs = [np.empty(m) for _ in fields]
    k = rule.nodes.shape[0]
    step = max(1, chunk_nodes // k)
    fixed = None if axis is None else _frames(np.asarray(axis, dtype=float)[None, :], n)[0]
    for s in range(0, m, step):
        xs = flat[s:s + step]
        if fixed is None:
            frames = _frames(xs, n)
            z = np.einsum("kj,mji->mki", rule.nodes, frames)
        else:
            z = np.broadcast_to(rule.nodes @ fixed, (xs.shape[0], k, n))
        y = xs[:, None, :] + t * z
        for out, f in zip(outs, fields):
            out[s:s + step] = f(z, y) @ rule.weights
    return [o.reshape(x.shape[:-1]) for o in outs]


@dataclass(frozen=True)
class KirchhoffCoefficients:
    n: int
    a: dict
    b: dict


def _raw_coefficients(n):
    if n == 3:
        c = 1.0 / (4.0 * math.pi)
    elif n == 2:
        c = 1.0 / (2.0 * math.pi)
    else:
        raise ValueError(f"unsupported dimension {n}; only n = 2, 3")
    return KirchhoffCoefficients(n, {0: c}, {0: c, 1: c})


def _rule_for(n):
    return sphere_rule() if n == 3 else disk_rule()


def wave_operators(h, grad_h, x, t, coeffs: KirchhoffCoefficients, rule=None, axis=None):
    """(w * h)(t, x) and (w_t * h)(t, x) via the mean-value formulas."""
    rule = _rule_for(coeffs.n) if rule is None else rule
    mean_h, mean_grad = surface_means(
        [lambda z, y: h(y), lambda z, y: np.sum(z * grad_h(y), axis=-1)],
        x, t, rule, axis,
    )
    w_h = coeffs.a[0] * t * mean_h
    wt_h = coeffs.b[0] * mean_h + coeffs.b[1] * t * mean_grad
    return w_h, wt_h


def plane_wave_eigencheck(coeffs: KirchhoffCoefficients, k, t, x):
    """Max deviation of the operators on h = cos(k.x) from their Fourier multipliers."""
    k = np.asarray(k, dtype=float)
    kn = float(np.linalg.norm(k))
    x = np.asarray(x, dtype=float)
    h = lambda y: np.cos(y @ k)
    grad = lambda y: -np.sin(y @ k)[..., None] * k
    w_h, wt_h = wave_operators(h, grad, x, t, coeffs, axis=k)
    expect_w = np.sin(t * kn) / kn * np.cos(x @ k)
    expect_wt = np.cos(t * kn) * np.cos(x @ k)
    return float(np.max(np.abs(w_h - expect_w))), float(np.max(np.abs(wt_h - expect_wt)))


def kirchhoff_coefficients(n: int, tol: float = 1e-6) -> KirchhoffCoefficients:
    """Mean-value coefficients for n in {2, 3}, validated on three plane waves."""
    coeffs = _raw_coefficients(n)
    rng = np.random.default_rng(12345)
    x = rng.uniform(-2.0, 2.0, size=(5, n))
    for kn, t in ((0.5, 3.0), (1.0, 2.0), (2.0, 1.5)):
        direction = np.zeros(n)
        direction[0], direction[1] = 0.6, 0.8
        dev = plane_wave_eigencheck(coeffs, kn * direction, t, x)
        if max(dev) > tol:
            raise RuntimeError(f"plane-wave eigencheck failed for n={n}, |k|={kn}: {dev}")
    return coeffs


def gaussian_kernel_eval(t, x, n: int | None = None):
    """G(t, x) = (2 pi t)^{-n/2} exp(-|x|^2 / (2t)), the inverse transform of e^{-t|xi|^2/2}."""
    t = float(t)
    if t <= 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    if n is None:
        n = x.shape[-1] if x.ndim else 1
    if n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        r2 = x * x
    else:
        r2 = np.sum(x * x, axis=-1)
    return (2.0 * math.pi * t) ** (-n / 2) * np.exp(-0.5 * r2 / t)


def _profile(t, x, P0, P1, n, rule):
    t = float(t)
    if t <= 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != n:
        raise ValueError(f"points must have last axis {n}")
    if P0 == 0 and P1 == 0:
        return np.zeros(x.shape[:-1])
    coeffs = _raw_coefficients(n)
    rule = _rule_for(n) if rule is None else rule
    norm = (2.0 * math.pi * t) ** (-n / 2)
    lead = P1 * coeffs.a[0] * t + P0 * coeffs.b[0]
    grad_coef = P0 * coeffs.b[1]

    # P1 (w * G) + P0 (w_t * G) as one integrand; z . grad G(t, y) = -(z . y / t) G
    def integrand(z, y):
        g = norm * np.exp(-0.5 * np.sum(y * y, axis=-1) / t)
        return g * (lead - grad_coef * np.sum(z * y, axis=-1))

    return surface_means([integrand], x, t, rule)[0]


def profile_n3(t, x, P0, P1, rule: SurfaceRule | None = None):
    """Diffusion-wave profile in R^3 at points x (..., 3)."""
    return _profile(t, x, P0, P1, 3, rule)


def profile_n2(t, x, P0, P1, rule: SurfaceRule | None = None):
    """Diffusion-wave profile in R^2 at points x (..., 2)."""
    return _profile(t, x, P0, P1, 2, rule)
