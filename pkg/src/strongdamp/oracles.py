"""Independent solution paths: a per-mode RK4 integrator and a periodic-box
spectral evolution in physical space.
"""
from __future__ import annotations

import json
import math
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.fft

from .symbols import dispersion_roots, hf_energy, mode_multipliers, profile_multipliers


class InstabilityError(RuntimeError):
    pass


class WraparoundError(ValueError):
    pass


def fft_workers() -> int:
    """Thread cap for transforms, from STRONGDAMP_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("STRONGDAMP_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class ModeState:
    v: complex
    vdot: complex


def max_stable_step(r: float) -> float:
    return 0.1 if r <= 0 else min(0.1, 1.0 / (r * r))


def mode_ode_evolve(r: float, v0: complex, v1: complex, t: float, dt: float) -> ModeState:
    """Classical RK4 for v'' + r^2 v' + r^2 v = 0, v(0) = v0, v'(0) = v1.

    The step is shrunk so that an integer number of steps lands on t.
    """
    if dt <= 0 or t < 0 or r < 0:
        raise ValueError("need dt > 0, t >= 0, r >= 0")
    if dt > max_stable_step(r) * (1 + 1e-12):
        raise InstabilityError(f"dt={dt} exceeds the stable step {max_stable_step(r)} at r={r}")
    steps = int(math.ceil(t / dt - 1e-12)) if t > 0 else 0
    h = t / steps if steps else 0.0
    r2 = r * r
    roots = dispersion_roots(r)
    rate = max(abs(roots.sigma1), abs(roots.sigma2))
    y0 = complex(v0)
    y1 = complex(v1)
    start = abs(y0) + abs(y1)

    def rhs(a, b):
        return b, -r2 * a - r2 * b

    for i in range(steps):
        k1a, k1b = rhs(y0, y1)
        k2a, k2b = rhs(y0 + 0.5 * h * k1a, y1 + 0.5 * h * k1b)
        k3a, k3b = rhs(y0 + 0.5 * h * k2a, y1 + 0.5 * h * k2b)
        k4a, k4b = rhs(y0 + h * k3a, y1 + h * k3b)
        y0 = y0 + h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        y1 = y1 + h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
        if i % 64 == 0 or i == steps - 1:
            now = (i + 1) * h
            size = abs(y0) + abs(y1)
            if not math.isfinite(size) or (
                size > 0 and math.log(size) > math.log(10.0 * (1.0 + now) * start + 1e-300) + rate * now
            ):
                raise InstabilityError(f"RK4 solution blew up at r={r}, dt={h}, t={now}")
    return ModeState(y0, y1)


@dataclass(frozen=True)
class GuardVerdict:
    passed: bool
    required: float
    margin: float

    def __bool__(self):
        return self.passed


def wraparound_guard(t: float, rho: float, box: float) -> GuardVerdict:
    """Box side ``box`` must cover the diffusion-wave cone: box >= 2 (t + rho + 6 sqrt(t))."""
    need = 2.0 * (t + rho + 6.0 * math.sqrt(max(t, 0.0)))
    return GuardVerdict(box >= need, need, box - need)


@dataclass(frozen=True)
class GridField:
    """Real samples on the periodic grid x_j = -box/2 + j box/N along each axis."""

    n: int
    box: float
    N: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ValueError("grids support n = 1, 2, 3")
        if self.N < 8 or self.N & (self.N - 1):
            raise ValueError("N must be a power of two >= 8")
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.N,) * self.n:
            raise ValueError(f"expected shape {(self.N,) * self.n}, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid values must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def spacing(self):
        return self.box / self.N

    def axis(self):
        return -0.5 * self.box + self.spacing * np.arange(self.N)

    def points(self):
        return np.stack(np.meshgrid(*([self.axis()] * self.n), indexing="ij"), axis=-1)

    def l2_norm(self) -> float:
        return math.sqrt(self.spacing**self.n * float(np.sum(self.values**2)))

    def effective_radius(self, rel: float = 1.5e-8) -> float:
        """Largest |x| where |u| exceeds rel * max|u| (6 widths for a Gaussian)."""
        peak = np.max(np.abs(self.values))
        if peak == 0:
            return 0.0
        pts = self.points()[np.abs(self.values) > rel * peak]
        return float(np.max(np.linalg.norm(pts, axis=-1)))

    def same_grid(self, other) -> bool:
        return self.n == other.n and self.N == other.N and self.box == other.box

    def save(self, path, **meta):
        """Write the flat binary file and a one-line JSON sidecar next to it."""
        path = Path(path)
        with open(path, "wb") as fh:
            fh.write(struct.pack("<qqd", self.n, self.N, float(self.box)))
            fh.write(np.ascontiguousarray(self.values, dtype="<f8").tobytes(order="C"))
        info = {"n": self.n, "N": self.N, "L": float(self.box), "dtype": "float64",
                "order": "row-major", "byteorder": "little", **meta}
        sidecar_path(path).write_text(json.dumps(info, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "GridField":
        raw = Path(path).read_bytes()
        n, N, box = struct.unpack_from("<qqd", raw)
        vals = np.frombuffer(raw, dtype="<f8", offset=24)
        if vals.size != N**n:
            raise ValueError(f"payload holds {vals.size} values, header says {N}^{n}")
        return cls(int(n), float(box), int(N), vals.reshape((N,) * n).astype(float))


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def sample_datum(datum, box: float, N: int) -> GridField:
    n = datum.n
    axis = -0.5 * box + (box / N) * np.arange(N)
    pts = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1)
    return GridField(n, box, N, datum(pts))


def wavenumber_radius(n: int, box: float, N: int) -> np.ndarray:
    k = 2.0 * math.pi * np.fft.fftfreq(N, d=box / N)
    grids = np.meshgrid(*([k] * n), indexing="ij", sparse=True)
    return np.sqrt(sum(g * g for g in grids))


def _check_real(z, label):
    scale = np.linalg.norm(z.real)
    if np.linalg.norm(z.imag) > 1e-10 * max(scale, np.finfo(float).tiny):
        raise FloatingPointError(f"{label}: imaginary residue above 1e-10 of the field norm")
    if not np.all(np.isfinite(z.real)):
        raise FloatingPointError(f"{label}: non-finite values in transform")
    return z.real


def _guard(t, rho, box):
    verdict = wraparound_guard(t, rho, box)
    if not verdict:
        raise WraparoundError(f"box {box} too small for t={t}, radius {rho}: need {verdict.required:.1f}")


def grid_evolve(u0: GridField, u1: GridField, t: float, rho: float | None = None) -> GridField:
    """Advance data on the periodic grid by the exact per-mode multipliers."""
    if not u0.same_grid(u1):
        raise ValueError("u0 and u1 must live on the same grid")
    if rho is None:
        rho = max(u0.effective_radius(), u1.effective_radius())
    _guard(t, rho, u0.box)
    w = fft_workers()
    U0 = scipy.fft.fftn(u0.values, workers=w)
    U1 = scipy.fft.fftn(u1.values, workers=w)
    mm = mode_multipliers(t, wavenumber_radius(u0.n, u0.box, u0.N))
    out = scipy.fft.ifftn(mm.m1 * U1 + mm.m0 * U0, workers=w)
    return GridField(u0.n, u0.box, u0.N, _check_real(out, "grid_evolve"))


def grid_energy(u0: GridField, u1: GridField, t: float) -> float:
    """Discrete ||u_t||^2 + ||grad u||^2 of the grid evolution at time t."""
    w = fft_workers()
    U0 = scipy.fft.fftn(u0.values, workers=w)
    U1 = scipy.fft.fftn(u1.values, workers=w)
    e = hf_energy(t, wavenumber_radius(u0.n, u0.box, u0.N), U0, U1)
    return float(u0.spacing**u0.n / u0.N**u0.n * np.sum(e))


def grid_profile(t: float, P0: float, P1: float, n: int, box: float, N: int) -> GridField:
    """Samples of the diffusion-wave profile by inverse transform on the grid."""
    _guard(t, 0.0, box)
    radius = wavenumber_radius(n, box, N)
    pm = profile_multipliers(t, radius)
    ints = np.meshgrid(*([np.fft.fftfreq(N, d=1.0 / N)] * n), indexing="ij", sparse=True)
    sign = (-1.0) ** (sum(np.rint(k).astype(np.int64) for k in ints) % 2)
    spec = (P1 * pm.p_sin + P0 * pm.p_cos) * sign
    out = (N / box) ** n * scipy.fft.ifftn(spec, workers=fft_workers())
    return GridField(n, box, N, _check_real(out, "grid_profile"))
