from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from khfield.harmonics import legendre_normalized
from khfield.quadrature import (
    azimuth_grid,
    gauss_legendre_elevation,
    lebedev_rule,
    lebedev_sizes,
    rule_for_band,
)


def _double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def _monomial_integral(a: int, b: int, c: int) -> float:
    """Closed-form integral of x^a y^b z^c over the unit sphere."""
    if a % 2 or b % 2 or c % 2:
        return 0.0
    num = (
        _double_factorial(a - 1)
        * _double_factorial(b - 1)
        * _double_factorial(c - 1)
    )
    return 4.0 * np.pi * num / _double_factorial(a + b + c + 1)


def test_sizes_are_sorted_and_match_published_table():
    sizes = lebedev_sizes()
    assert list(sizes) == sorted(sizes)
    for expected in (6, 110, 302, 434, 590, 974, 1202, 1454):
        assert expected in sizes
    # the published sequence skips these (no all-positive weights)
    for missing in (74, 230, 266):
        assert missing not in sizes


def test_weights_sum_to_sphere_area():
    for size in lebedev_sizes():
        rule = lebedev_rule(size)
        assert rule.node_count == size
        np.testing.assert_allclose(rule.weights.sum(), 4.0 * np.pi, rtol=1e-13)


def test_nodes_lie_on_unit_sphere():
    for size in (6, 50, 302, 1454):
        xyz = lebedev_rule(size).cartesian()
        np.testing.assert_allclose(np.linalg.norm(xyz, axis=1), 1.0, atol=1e-13)


def test_smallest_rule_integrates_cubics_exactly():
    rule = lebedev_rule(6)
    x, y, z = lebedev_rule(6).cartesian().T
    for a in range(4):
        for b in range(4 - a):
            for c in range(4 - a - b):
                got = np.sum(rule.weights * x**a * y**b * z**c)
                want = _monomial_integral(a, b, c)
                np.testing.assert_allclose(got, want, atol=1e-13)


def test_probe_polynomial_integral():
    # degree-6 probe with known value 216*pi/35
    rule = lebedev_rule(110)
    x, y, z = rule.cartesian().T
    f = 1 + x + y**2 + x**2 * y + x**4 + y**5 + x**2 * y**2 * z**2
    np.testing.assert_allclose(
        np.sum(rule.weights * f), 216.0 * np.pi / 35.0, rtol=1e-13
    )


def test_harmonic_orthonormality_under_quadrature():
    rule = lebedev_rule(302)  # order 29, exact through degree pairs n+n' <= 29
    x = np.cos(rule.theta)
    cases = [(0, 0), (3, 0), (5, 2), (9, 9), (14, 7)]

    def basis(n, m, trig):
        leg = np.array([legendre_normalized(n, m, t) for t in x])
        ang = np.cos(m * rule.phi) if trig == "c" else np.sin(m * rule.phi)
        return leg * ang

    for i, (n1, m1) in enumerate(cases):
        f1 = basis(n1, m1, "c")
        # diagonal: integral of Pbar^2 cos^2 = pi * (1 + [m == 0])
        want = np.pi * (2.0 if m1 == 0 else 1.0)
        np.testing.assert_allclose(np.sum(rule.weights * f1 * f1), want, atol=1e-11)
        for n2, m2 in cases[i + 1 :]:
            f2 = basis(n2, m2, "c")
            assert abs(np.sum(rule.weights * f1 * f2)) < 1e-11
        if m1 > 0:
            # cos and sin branches of the same (n, m) are orthogonal
            g1 = basis(n1, m1, "s")
            assert abs(np.sum(rule.weights * f1 * g1)) < 1e-11
            np.testing.assert_allclose(
                np.sum(rule.weights * g1 * g1), np.pi, atol=1e-11
            )


def test_unknown_size_reports_available_sizes():
    with pytest.raises(ValueError, match="available sizes"):
        lebedev_rule(100)


def test_rule_for_band_reference_points():
    assert rule_for_band(8).node_count == 110
    assert rule_for_band(12).node_count == 302
    assert rule_for_band(16).node_count == 434
    assert rule_for_band(24).node_count == 974
    assert rule_for_band(28).node_count == 1202
    assert rule_for_band(32).node_count == 1454


def test_rule_for_band_rejects_negative_and_oversized():
    with pytest.raises(ValueError, match="nonnegative"):
        rule_for_band(-1)
    with pytest.raises(ValueError, match="no embedded rule"):
        rule_for_band(10_000)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=32))
def test_rule_for_band_is_minimal_covering_rule(n_max):
    rule = rule_for_band(n_max)
    assert rule.order >= 2 * n_max
    smaller = [s for s in lebedev_sizes() if s < rule.node_count]
    for s in smaller:
        assert lebedev_rule(s).order < 2 * n_max


def test_elevation_rule_weights_sum_to_pi():
    for length in (1, 4, 17, 66):
        elev = gauss_legendre_elevation(length)
        assert elev.length == length
        np.testing.assert_allclose(elev.weights.sum(), np.pi, rtol=1e-13)
        assert np.all(elev.nodes > 0.0) and np.all(elev.nodes < np.pi)


def test_elevation_rule_polynomial_exactness():
    length = 6  # exact through degree 2*length - 1
    elev = gauss_legendre_elevation(length)
    for d in range(2 * length):
        got = np.sum(elev.weights * elev.nodes**d)
        want = np.pi ** (d + 1) / (d + 1)
        np.testing.assert_allclose(got, want, rtol=1e-12)


def test_elevation_rule_length_validation():
    with pytest.raises(ValueError, match="at least 1"):
        gauss_legendre_elevation(0)


def test_azimuth_grid_trig_sums():
    grid = azimuth_grid(12)
    assert grid.count == 12
    np.testing.assert_allclose(grid.nodes, 2.0 * np.pi * np.arange(12) / 12)
    for k in range(1, 12):
        assert abs(np.sum(np.cos(k * grid.nodes))) < 1e-12
        assert abs(np.sum(np.sin(k * grid.nodes))) < 1e-12
    for k in range(1, 6):
        np.testing.assert_allclose(np.sum(np.cos(k * grid.nodes) ** 2), 6.0)


def test_azimuth_grid_count_validation():
    with pytest.raises(ValueError, match="at least one node"):
        azimuth_grid(0)
