from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from khfield.propagate import FieldSeries
from khfield.timeweights import (
    MAX_ORDER,
    bin_delay,
    lagrange_weights,
    scatter_increment,
    scatter_weights,
)


class _Poly:
    """Polynomial over a scaled variable, with analytic derivatives."""

    def __init__(self, coeffs, center: float, scale: float):
        self.c = np.asarray(coeffs, dtype=float)
        self.center = center
        self.scale = scale

    def __call__(self, x):
        return np.polyval(self.c[::-1], (np.asarray(x) - self.center) / self.scale)

    def d1(self, x):
        dc = self.c[1:] * np.arange(1, self.c.size)
        return np.polyval(dc[::-1], (x - self.center) / self.scale) / self.scale

    def d2(self, x):
        dc = self.c[2:] * np.arange(2, self.c.size) * np.arange(1, self.c.size - 1)
        return np.polyval(dc[::-1], (x - self.center) / self.scale) / self.scale**2


def _test_poly(degree: int, center: float, scale: float) -> _Poly:
    coeffs = [0.3, -1.1, 0.8, 0.4, -0.2, 0.05, 0.01, -0.02, 0.003, 0.7, -0.4, 0.1, 0.2]
    return _Poly(coeffs[: degree + 1], center, scale)


def test_gather_weight_sums():
    # constants interpolate exactly, so w sums to 1 and both derivative
    # rows annihilate them
    for K in range(1, MAX_ORDER + 1):
        for delta in (0.0, 0.25, 0.637):
            g = lagrange_weights(K, delta)
            np.testing.assert_allclose(g.w.sum(), 1.0, atol=1e-10)
            np.testing.assert_allclose(g.wd.sum(), 0.0, atol=1e-9)
            np.testing.assert_allclose(g.wdd.sum(), 0.0, atol=1e-8)


def test_gather_rows_reproduce_polynomial_and_derivatives():
    for K in (2, 4, 6, 8):
        g = lagrange_weights(K, 0.37)
        u = np.arange(K + 1, dtype=float)
        f = _test_poly(K, K / 2.0, float(K))
        np.testing.assert_allclose(g.w @ f(u), f(0.37), atol=1e-13)
        np.testing.assert_allclose(g.wd @ f(u), f.d1(0.37), atol=1e-13)
        np.testing.assert_allclose(g.wdd @ f(u), f.d2(0.37), atol=1e-12)


def test_gather_exact_hit_returns_unit_row():
    for K in (1, 4, 9):
        g = lagrange_weights(K, 0.0)
        want = np.zeros(K + 1)
        want[0] = 1.0
        np.testing.assert_allclose(g.w, want, atol=1e-14)
        assert g.lead == 0


def test_gather_order_of_accuracy():
    # interpolation of a smooth non-polynomial converges at order K + 1
    for K, expected in ((2, 3.0), (4, 5.0), (6, 7.0)):
        spacings = np.array([0.08, 0.04, 0.02, 0.01])
        errors = []
        for dt in spacings:
            g = lagrange_weights(K, 0.37)
            base = np.arange(K + 1, dtype=float)
            worst = 0.0
            for t0 in np.linspace(0.0, 2.0, 17):
                samples = np.sin(3.0 * (t0 + base * dt))
                exact = np.sin(3.0 * (t0 + 0.37 * dt))
                worst = max(worst, abs(g.w @ samples - exact))
            errors.append(worst)
        slope = np.polyfit(np.log(spacings), np.log(errors), 1)[0]
        assert abs(slope - expected) < 0.4, (K, slope, errors)


def test_scatter_shape_and_lead():
    for K in range(1, MAX_ORDER + 1):
        s = scatter_weights(K, 0.5)
        h = K // 2 + 1
        assert s.lead == h
        assert s.w.size == K + 1 + 2 * h
        assert s.wd.size == s.w.size and s.wdd.size == s.w.size


def test_scatter_weight_sums():
    for K in range(1, MAX_ORDER + 1):
        for delta in (0.0, 0.25, 0.637):
            s = scatter_weights(K, delta)
            np.testing.assert_allclose(s.w.sum(), 1.0, atol=1e-10)
            np.testing.assert_allclose(s.wd.sum(), 0.0, atol=1e-9)
            np.testing.assert_allclose(s.wdd.sum(), 0.0, atol=1e-8)


def test_scatter_composite_identities():
    # the value row deposits f(h + delta); the derivative rows realize
    # centered differences of the deposited series, so their gather
    # reading is -f' and +f'' at the same point
    for K in (1, 2, 4, 6, 8):
        delta = 0.37
        s = scatter_weights(K, delta)
        u = np.arange(s.w.size, dtype=float)
        f = _test_poly(K, s.w.size / 2.0, float(s.w.size))
        x = s.lead + delta
        np.testing.assert_allclose(s.w @ f(u), f(x), atol=1e-13)
        np.testing.assert_allclose(s.wd @ f(u), -f.d1(x), atol=1e-13)
        np.testing.assert_allclose(s.wdd @ f(u), f.d2(x), atol=1e-12)


def test_scatter_exact_hit_value_row():
    s = scatter_weights(4, 0.0)
    want = np.zeros(s.w.size)
    want[s.lead] = 1.0
    np.testing.assert_allclose(s.w, want, atol=1e-14)


def _deposit(q: np.ndarray, row: np.ndarray):
    """Accumulate one ring's scatter; returns the full convolution."""
    return np.convolve(q, row)


def test_deposited_series_tracks_signal_and_time_derivatives():
    # accumulating over source samples turns the stencil reversal into a
    # plain +d/dt: acc_wd / dt follows q', acc_wdd / dt^2 follows q''
    K, dt, R = 4, 0.01, 0.737
    b = bin_delay(R, 1.0, dt)
    s = scatter_weights(K, b.delta)
    n_src = 400
    t = dt * np.arange(n_src)
    poly = _Poly([0.2, 1.0, -0.7, 0.3, -0.05], 2.0, 1.0)
    q = poly(t)
    acc_w = _deposit(q, s.w)
    acc_wd = _deposit(q, s.wd)
    acc_wdd = _deposit(q, s.wdd)
    ks = np.arange(s.w.size - 1, n_src)  # rows with full stencil coverage
    t_out = (ks - s.lead - b.delta) * dt
    np.testing.assert_allclose(acc_w[ks], poly(t_out), atol=1e-11)
    np.testing.assert_allclose(acc_wd[ks] / dt, poly.d1(t_out), atol=1e-9)
    np.testing.assert_allclose(acc_wdd[ks] / dt**2, poly.d2(t_out), atol=1e-6)


def test_deposit_order_of_accuracy():
    # for a smooth signal both the value and first-derivative readings
    # converge at the full stencil order K + 1; the travel distance is
    # tied to the spacing so the fractional offset (and with it the
    # leading error coefficient) stays fixed across the fit
    cases = {
        2: np.array([0.04, 0.02, 0.01, 0.005]),
        4: np.array([0.08, 0.04, 0.02, 0.01]),
        6: np.array([0.16, 0.08, 0.04, 0.02]),
    }
    for K, spacings in cases.items():
        errs_w, errs_wd = [], []
        for dt in spacings:
            b = bin_delay((50 + 0.37) * dt, 1.0, dt)
            s = scatter_weights(K, b.delta)
            n_src = int(4.0 / dt)
            t = dt * np.arange(n_src)
            q = np.sin(3.0 * t)
            ks = np.arange(s.w.size - 1, n_src)
            t_out = (ks - s.lead - b.delta) * dt
            errs_w.append(np.max(np.abs(_deposit(q, s.w)[ks] - np.sin(3.0 * t_out))))
            errs_wd.append(
                np.max(np.abs(_deposit(q, s.wd)[ks] / dt - 3.0 * np.cos(3.0 * t_out)))
            )
        slope_w = np.polyfit(np.log(spacings), np.log(errs_w), 1)[0]
        slope_wd = np.polyfit(np.log(spacings), np.log(errs_wd), 1)[0]
        assert abs(slope_w - (K + 1)) < 0.7, (K, slope_w, errs_w)
        assert abs(slope_wd - (K + 1)) < 0.7, (K, slope_wd, errs_wd)


def test_order_validation():
    with pytest.raises(ValueError, match="stencil order"):
        lagrange_weights(0, 0.5)
    with pytest.raises(ValueError, match="stencil order"):
        scatter_weights(MAX_ORDER + 1, 0.5)


def test_delta_validation():
    with pytest.raises(ValueError, match="fractional offset"):
        lagrange_weights(4, 1.0)
    with pytest.raises(ValueError, match="fractional offset"):
        scatter_weights(4, -0.1)


def test_bin_delay_splits_whole_and_fractional_steps():
    b = bin_delay(2.5, 1.0, 0.5)
    assert b.n == 5 and b.delta == 0.0
    b = bin_delay(2.6, 1.0, 0.5)
    assert b.n == 5
    np.testing.assert_allclose(b.delta, 0.2, atol=1e-12)
    np.testing.assert_allclose((b.n + b.delta) * 0.5, 2.6, atol=1e-12)


def test_bin_delay_validation():
    with pytest.raises(ValueError, match="sound speed"):
        bin_delay(1.0, 0.0, 0.1)
    with pytest.raises(ValueError, match="time step"):
        bin_delay(1.0, 1.0, -0.1)
    with pytest.raises(ValueError, match="nonnegative"):
        bin_delay(-1.0, 1.0, 0.1)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(min_value=1e-6, max_value=100.0),
    st.floats(min_value=1e-3, max_value=10.0),
    st.floats(min_value=1e-4, max_value=1.0),
)
def test_bin_delay_reconstructs_travel_time(R, c, dt):
    b = bin_delay(R, c, dt)
    assert b.n >= 0
    assert 0.0 <= b.delta < 1.0
    np.testing.assert_allclose((b.n + b.delta) * c * dt, R, rtol=1e-9)


@settings(max_examples=40, deadline=None)
@given(
    st.integers(min_value=1, max_value=8),
    st.floats(min_value=0.0, max_value=0.999),
)
def test_scatter_sums_property(K, delta):
    s = scatter_weights(K, delta)
    np.testing.assert_allclose(s.w.sum(), 1.0, atol=1e-10)
    np.testing.assert_allclose(s.wd.sum(), 0.0, atol=1e-9)
    np.testing.assert_allclose(s.wdd.sum(), 0.0, atol=1e-9)


def test_scatter_increment_places_window():
    b = bin_delay(0.9, 1.0, 0.1)  # n = 9 (delta 0 up to rounding)
    s = scatter_weights(2, b.delta)
    series = FieldSeries(dt=0.1, start=0, p=np.zeros(40))
    scatter_increment(series, 3, b, s, amplitude=2.0)
    first = 3 + b.n - s.lead
    np.testing.assert_allclose(
        series.p[first : first + s.w.size],
        s.w * 2.0 / (4.0 * np.pi * b.R),
        atol=1e-15,
    )
    assert np.all(series.p[:first] == 0.0)
    assert np.all(series.p[first + s.w.size :] == 0.0)


def test_scatter_increment_bounds_and_distance_checks():
    b = bin_delay(0.9, 1.0, 0.1)
    s = scatter_weights(2, b.delta)
    short = FieldSeries(dt=0.1, start=0, p=np.zeros(5))
    with pytest.raises(ValueError, match="scatter window"):
        scatter_increment(short, 3, b, s, amplitude=1.0)
    zero = bin_delay(0.0, 1.0, 0.1)
    series = FieldSeries(dt=0.1, start=0, p=np.zeros(40))
    with pytest.raises(ValueError, match="positive source distance"):
        scatter_increment(series, 3, zero, s, amplitude=1.0)
