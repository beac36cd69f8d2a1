import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strongdamp.data import (
    Bump,
    Dipole,
    Gaussian,
    GridSamples,
    lemma22_check,
    lemma22_constants,
    moments,
    oscillatory_parts,
    spectrum,
)

L_FROZEN = 0.7246113537767085
THETA_FROZEN = 2.331122370414423


def on_grid(datum, box, N):
    ax = -0.5 * box + box / N * np.arange(N)
    pts = np.stack(np.meshgrid(*([ax] * datum.n), indexing="ij"), axis=-1)
    return GridSamples(datum.n, box, N, datum(pts))


# ---------------------------------------------------------------- moments


def test_gaussian_moments_example():
    m = moments(Gaussian(1, 1.0, math.sqrt(0.5)))
    assert m.P == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert m.l11 == pytest.approx(math.sqrt(math.pi) + 1.0, rel=1e-14)


def test_dipole_has_zero_mass():
    assert moments(Dipole(2, 1.5, 0.7, [0.4, 0.3])).P == 0.0


def test_mass_independent_of_center():
    masses = [moments(Gaussian(2, 1.0, 1.0, [c, 0.0])) for c in (0.0, 1.0, 3.0)]
    assert masses[0].P == masses[1].P == masses[2].P
    assert masses[0].l11 < masses[1].l11 < masses[2].l11


@pytest.mark.parametrize("datum,box,N", [
    (Gaussian(2, 1.3, 0.8, [0.7, -0.4]), 16.0, 256),
    (Dipole(2, 0.9, 0.6, [0.8, 0.5]), 16.0, 256),
    (Dipole(3, 1.0, 0.7, [0.5, 0.0, 0.4]), 12.0, 96),
    (Bump(2, 1.0, 1.5, 3), 4.0, 512),
    (Bump(3, -2.0, 1.0, 2), 2.5, 128),
])
def test_moments_against_riemann_sums(datum, box, N):
    got, ref = datum.moments(), on_grid(datum, box, N).moments()
    assert got.P == pytest.approx(ref.P, rel=1e-6, abs=1e-10)
    assert got.l1 == pytest.approx(ref.l1, rel=1e-4)
    assert got.l11 == pytest.approx(ref.l11, rel=1e-4)


def test_dipole_first_moment_1d_mpmath():
    s, d = 0.8, 1.3
    g = lambda x: mp.exp(-(x - d) ** 2 / (2 * s * s)) - mp.exp(-(x + d) ** 2 / (2 * s * s))
    first = mp.quad(lambda x: abs(x) * abs(g(x)), [-mp.inf, -d, 0, d, mp.inf])
    l1 = mp.quad(lambda x: abs(g(x)), [-mp.inf, 0, mp.inf])
    m = Dipole(1, 1.0, s, [d]).moments()
    assert m.l11 == pytest.approx(float(l1 + first), rel=1e-12)


def test_bump_mass_mpmath():
    b = Bump(3, 1.0, 1.2, 2)
    want = 4 * mp.pi * mp.quad(lambda r: r * r * (1 - (r / 1.2) ** 2) ** 2, [0, 1.2])
    assert b.moments().P == pytest.approx(float(want), rel=1e-14)


def families():
    return st.one_of(
        st.builds(lambda n, a, s, c: Gaussian(n, a, s, list(c[:n])), st.integers(1, 3),
                  st.floats(-3, 3), st.floats(0.2, 3), st.tuples(*[st.floats(-3, 3)] * 3)),
        st.builds(lambda n, a, s, c: Dipole(n, a, s, [1.0 + c[0]] + list(c[1:n])), st.integers(1, 3),
                  st.floats(-3, 3), st.floats(0.2, 3), st.tuples(*[st.floats(0, 2)] * 3)),
        st.builds(Bump, st.integers(1, 3), st.floats(-3, 3), st.floats(0.2, 3), st.integers(1, 4)),
    )


@settings(max_examples=60, deadline=None)
@given(families())
def test_moment_ordering(datum):
    m = datum.moments()
    assert m.l11 >= m.l1 * (1 - 1e-14) and m.l1 >= abs(m.P) * (1 - 1e-14) and abs(m.P) >= 0


def test_grid_samples_reject_nonfinite():
    vals = np.zeros((8, 8))
    vals[2, 3] = np.nan
    with pytest.raises(ValueError):
        GridSamples(2, 4.0, 8, vals)
    with pytest.raises(ValueError):
        GridSamples(2, 4.0, 8, np.zeros((8, 4)))


# ---------------------------------------------------------------- spectra


@settings(max_examples=40, deadline=None)
@given(families())
def test_spectrum_at_origin_is_mass(datum):
    assert complex(spectrum(datum, np.zeros((1, datum.n)))[0]) == pytest.approx(datum.moments().P, abs=1e-12)


def test_centered_gaussian_spectrum_real_positive_radial():
    g = Gaussian(2, 1.0, 0.9)
    xi = np.array([[0.3, 0.4], [0.5, 0.0], [-0.4, 0.3]])
    s = g.spectrum(xi)
    assert np.all(s.imag == 0) and np.all(s.real > 0)
    assert s[0] == pytest.approx(s[1], rel=1e-15) and s[0] == pytest.approx(s[2], rel=1e-15)


def test_shifted_gaussian_spectrum_example():
    g = Gaussian(1, 1.0, math.sqrt(0.5), [1.0])
    got = complex(g.spectrum(np.array([[math.pi]]))[0])
    want = mp.sqrt(mp.pi) * mp.exp(-1j * mp.pi) * mp.exp(-mp.pi**2 / 4)
    assert got == pytest.approx(complex(want), abs=1e-16)


@pytest.mark.parametrize("datum,box,N", [
    (Gaussian(1, 1.0, 0.7, [1.2]), 24.0, 512),
    (Dipole(2, 1.0, 0.7, [0.6, 0.2]), 16.0, 64),
    (Bump(1, 1.0, 1.0, 3), 4.0, 2048),
])
def test_spectrum_against_direct_sums(datum, box, N):
    xi = np.random.default_rng(3).normal(size=(6, datum.n))
    grid = on_grid(datum, box, N)
    assert np.allclose(datum.spectrum(xi), grid.spectrum(xi), rtol=0, atol=1e-6 * datum.moments().l1)


def test_bump_spectrum_against_mpmath():
    b = Bump(3, 1.0, 1.0, 2)
    for r in (0.3, 2.0, 7.5):
        # radial transform in 3-D: 4 pi int rho^2 u(rho) sin(r rho)/(r rho) drho
        want = 4 * mp.pi * mp.quad(lambda p: p * p * (1 - p * p) ** 2 * mp.sin(r * p) / (r * p), [0, 1])
        assert complex(b.spectrum(np.array([[r, 0.0, 0.0]]))[0]).real == pytest.approx(float(want), rel=1e-12)


# ---------------------------------------------------------------- oscillatory parts


def test_oscillatory_parts_vanish_at_origin():
    for d in (Gaussian(2, 1, 1, [1, 2]), Dipole(2, 1, 1, [1, 0]), Bump(2)):
        p = oscillatory_parts(d, np.zeros((1, 2)))
        assert p.A[0] == 0 and p.B[0] == 0


def test_radial_data_have_no_B():
    xi = np.random.default_rng(0).normal(size=(20, 3))
    for d in (Gaussian(3, 2.0, 0.5), Bump(3, 1.0, 2.0, 1)):
        assert np.all(d.oscillatory_parts(xi).B == 0)


@pytest.mark.parametrize("datum", [
    Gaussian(1, 1.0, 0.8, [1.5]),
    Gaussian(2, -0.7, 1.1, [0.5, -1.0]),
    Dipole(3, 1.0, 0.6, [0.3, 0.4, 0.0]),
    Bump(2, 1.0, 1.3, 2),
])
def test_closed_form_parts_match_quadrature(datum):
    xi = np.random.default_rng(1).normal(size=(5, datum.n)) * 1.5
    closed = oscillatory_parts(datum, xi)
    quad = oscillatory_parts(datum, xi, method="quadrature")
    assert np.allclose(closed.A, quad.A, rtol=0, atol=1e-8)
    assert np.allclose(closed.B, quad.B, rtol=0, atol=1e-8)


def test_unknown_method():
    with pytest.raises(ValueError):
        oscillatory_parts(Gaussian(1), np.array([[1.0]]), method="fft")


@settings(max_examples=60, deadline=None)
@given(families(), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_decomposition_identity(datum, a, b, c):
    xi = np.array([[a, b, c][: datum.n]])
    p = datum.oscillatory_parts(xi)
    m = datum.moments()
    lhs = datum.spectrum(xi)[0]
    assert abs(lhs - (p.A[0] - 1j * p.B[0] + m.P)) <= 1e-8 * (m.l1 + abs(m.P))


@settings(max_examples=60, deadline=None)
@given(families(), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_spectrum_continuity_at_origin(datum, a, b, c):
    xi = np.array([[a, b, c][: datum.n]])
    L = lemma22_constants().L
    m = datum.moments()
    r = float(np.linalg.norm(xi))
    gap = abs(datum.spectrum(xi)[0] - m.P)
    assert gap <= (L + 1.0) * r * m.l11 * (1 + 1e-12) + 1e-14


# ---------------------------------------------------------------- oscillatory-part constants


def test_lemma22_constants_frozen():
    c = lemma22_constants()
    assert c.M == 1.0
    assert c.L == pytest.approx(L_FROZEN, rel=1e-14)
    assert c.theta_star == pytest.approx(THETA_FROZEN, rel=1e-13)
    assert 0.72 < c.L < 0.73
    assert abs(math.tan(c.theta_star / 2) - c.theta_star) <= 1e-10


def test_lemma22_constant_50_digits():
    th = mp.findroot(lambda x: mp.tan(x / 2) - x, 2.33)
    c = lemma22_constants()
    assert c.theta_star == pytest.approx(float(th), rel=1e-15)
    assert c.L == pytest.approx(float((1 - mp.cos(th)) / th), rel=1e-15)


def test_lemma22_brute_scan():
    c = lemma22_constants()
    worst = 0.0
    for lo, hi in ((1e-9, 10.0), (10.0, 1e6)):
        th = np.linspace(lo, hi, 5_000_000)
        worst = max(worst, float(np.max(2 * np.sin(th / 2) ** 2 / th)))
    assert worst <= c.L
    th = np.linspace(1e-9, 1e3, 1_000_000)
    assert np.max(np.abs(np.sin(th) / th)) <= c.M


@settings(max_examples=100, deadline=None)
@given(families(), st.floats(-20, 20), st.floats(-20, 20), st.floats(-20, 20))
def test_lemma22_ratios_bounded(datum, a, b, c):
    xi = np.array([[a, b, c][: datum.n]])
    ra, rb = lemma22_check(datum, xi)
    L = lemma22_constants().L
    assert ra[0] <= L + 1e-9 and rb[0] <= 1 + 1e-9


def test_lemma22_check_origin_and_radial():
    ra, rb = lemma22_check(Gaussian(2, 1.0, 1.0), np.array([[0.0, 0.0], [0.5, 0.5]]))
    assert ra[0] == 0 and rb[0] == 0 and rb[1] == 0


def test_lemma22_sharpness_probe():
    # a narrow bump at |x| = x0 with x0 xi = theta* pushes ratio A to L x0/(1 + x0)
    L, th = lemma22_constants().L, lemma22_constants().theta_star
    probes = []
    for x0 in (10.0, 100.0, 1000.0):
        g = Gaussian(1, 1.0, 1e-3 * x0, [x0])
        ra, _ = lemma22_check(g, np.array([[th / x0]]))
        probes.append(ra[0])
        assert ra[0] == pytest.approx(L * x0 / (1 + x0), rel=1e-4)
    assert probes[0] < probes[1] < probes[2] < L
