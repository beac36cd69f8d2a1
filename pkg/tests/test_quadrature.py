import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strongdamp.quadrature import (
    NonConvergenceError,
    RadialIntegralSpec,
    adaptive_integrate,
    gaussian_moment,
    gaussian_tail,
    radial_integral,
    sphere_area,
)


@pytest.mark.parametrize("n,area", [(1, 2.0), (2, 2 * math.pi), (3, 4 * math.pi)])
def test_sphere_area(n, area):
    assert sphere_area(n) == pytest.approx(area, rel=1e-15)


@pytest.mark.parametrize("n", [0, -1, 2.5])
def test_sphere_area_rejects(n):
    with pytest.raises(ValueError):
        sphere_area(n)


def test_gaussian_over_plane():
    spec = RadialIntegralSpec(n=2, f=lambda r: np.exp(-4 * r * r), envelope=((1.0, 4.0),))
    assert radial_integral(spec).value == pytest.approx(math.pi / 4, rel=1e-10)


def test_second_moment_in_3d():
    spec = RadialIntegralSpec(n=3, f=lambda r: r * r * np.exp(-r * r), envelope=((1.0, 0.5),))
    assert radial_integral(spec).value == pytest.approx(1.5 * math.pi**1.5, rel=1e-10)


def test_unit_ball_volume():
    spec = RadialIntegralSpec(n=3, f=lambda r: np.ones_like(r), a=0.0, b=1.0)
    assert radial_integral(spec).value == pytest.approx(4 * math.pi / 3, rel=1e-12)


def test_spec_validation():
    with pytest.raises(ValueError):
        RadialIntegralSpec(n=1, f=np.exp, a=1.0, b=1.0)
    with pytest.raises(ValueError):
        RadialIntegralSpec(n=1, f=np.exp, tol=0.0, b=1.0)
    with pytest.raises(ValueError):
        RadialIntegralSpec(n=1, f=np.exp)  # semi-infinite without envelope
    with pytest.raises(ValueError):
        RadialIntegralSpec(n=0, f=np.exp, b=1.0)


def test_nonconvergence_carries_estimate():
    with pytest.raises(NonConvergenceError) as info:
        adaptive_integrate(lambda x: np.sin(1e6 * x) ** 2, 0.0, 1.0, tol=1e-14, max_intervals=8)
    assert math.isfinite(info.value.value) and info.value.error > 0


def test_oscillatory_integral_with_wavelength():
    t = 1e4
    spec = RadialIntegralSpec(n=1, f=lambda r: np.sin(t * r) ** 2, a=0.0, b=1.0,
                              wavelength=2 * math.pi / t, tol=1e-12)
    exact = 2 * (0.5 - math.sin(2 * t) / (4 * t))
    assert radial_integral(spec).value == pytest.approx(exact, rel=1e-11)


def test_reported_error_is_honest():
    battery = [
        (1, lambda r: np.exp(-r * r) * np.cos(3 * r), ((1.0, 1.0),)),
        (2, lambda r: np.exp(-2 * r * r) / (1 + r), ((1.0, 2.0),)),
        (3, lambda r: r**4 * np.exp(-r * r), ((30.0, 0.5),)),
        (2, lambda r: np.sinc(r) ** 2 * np.exp(-0.1 * r * r), ((1.0, 0.1),)),
    ]
    for n, f, env in battery:
        coarse = radial_integral(RadialIntegralSpec(n=n, f=f, envelope=env, tol=1e-6))
        fine = radial_integral(RadialIntegralSpec(n=n, f=f, envelope=env, tol=5e-7))
        assert abs(coarse.value - fine.value) <= coarse.error + fine.error


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.floats(0.05, 50.0), st.floats(0.05, 5.0))
def test_bounded_plus_tail_equals_full(n, t, cut):
    body = radial_integral(RadialIntegralSpec(n=n, f=lambda r: np.exp(-t * r * r), b=cut, tol=1e-12))
    tail = radial_integral(RadialIntegralSpec(n=n, f=lambda r: np.exp(-t * r * r), a=cut, tol=1e-12,
                                              abs_tol=1e-14 * (math.pi / t) ** (n / 2),
                                              envelope=((1.0, t),)))
    full = (math.pi / t) ** (n / 2)
    assert body.value + tail.value == pytest.approx(full, rel=1e-9)


@settings(max_examples=50)
@given(st.integers(1, 3), st.floats(0.01, 100.0), st.floats(0.0, 6.0))
def test_gaussian_tail_matches_mpmath(n, beta, R):
    got = gaussian_tail(n, [(1.0, beta)], R)
    want = (mp.pi / beta) ** (mp.mpf(n) / 2) * mp.gammainc(mp.mpf(n) / 2, beta * R * R, regularized=True,
                                                         b=mp.inf)
    assert got == pytest.approx(float(want), rel=1e-10, abs=1e-300)


def test_gaussian_moment_examples():
    assert gaussian_moment(0, 2.0, 3) == pytest.approx((math.pi / 2) ** 1.5, rel=1e-15)
    assert gaussian_moment(1, 1.0, 1) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-15)
    assert gaussian_moment(2, 3.0, 2, upper=0.5) < gaussian_moment(2, 3.0, 2)


def test_gaussian_moment_rejects():
    with pytest.raises(ValueError):
        gaussian_moment(1, 0.0, 2)
    with pytest.raises(ValueError):
        gaussian_moment(-1, 1.0, 2)


@settings(max_examples=50)
@given(st.integers(0, 3), st.integers(1, 3), st.floats(0.01, 1e4))
def test_gaussian_moment_scaling(k, n, t):
    c1 = gaussian_moment(k, 1.0, n)
    assert gaussian_moment(k, t, n) * t ** (k + n / 2) == pytest.approx(c1, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 3), st.integers(1, 3), st.floats(0.1, 1e4), st.floats(0.05, 2.0))
def test_bounded_moment_against_incomplete_gamma(k, n, t, upper):
    got = gaussian_moment(k, t, n, upper)
    a = mp.mpf(n + 2 * k) / 2
    want = sphere_area(n) / 2 * mp.mpf(t) ** (-a) * mp.gammainc(a, 0, t * upper * upper)
    assert got == pytest.approx(float(want), rel=1e-10)


def test_deterministic_summation():
    spec = RadialIntegralSpec(n=2, f=lambda r: np.exp(-r * r) * np.cos(40 * r) ** 2,
                              envelope=((1.0, 1.0),), wavelength=0.1)
    assert radial_integral(spec) == radial_integral(spec)
