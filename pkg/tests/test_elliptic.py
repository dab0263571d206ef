import numpy as np
import pytest
from scipy.integrate import quad

from finiteband.bands import BandStructure
from finiteband.elliptic import curve_from_bands, wp
from finiteband.errors import DegenerateGap, PoleProximity

SYM = curve_from_bands(BandStructure((-1.0, 0.0, 1.0)))
GEN = curve_from_bands(BandStructure((0.0, 1.0, 3.0)))


def test_symmetric_curve_is_lemniscatic():
    assert (SYM.e1, SYM.e2, SYM.e3) == (1.0, 0.0, -1.0)
    assert np.isclose(SYM.g2, 4.0)
    assert np.isclose(SYM.g3, 0.0)


def test_roots_sum_to_zero_and_coefficients_match():
    for c in (SYM, GEN):
        assert abs(c.e1 + c.e2 + c.e3) < 1e-12
        # 4t^3 - g2 t - g3 = 4(t-e1)(t-e2)(t-e3)
        for t in (0.3, -1.7, 2.2):
            lhs = 4 * t ** 3 - c.g2 * t - c.g3
            rhs = 4 * (t - c.e1) * (t - c.e2) * (t - c.e3)
            assert abs(lhs - rhs) < 1e-12 * (1 + abs(lhs))
        assert c.g2 ** 3 - 27 * c.g3 ** 2 > 0


def test_half_periods_against_integral_oracle():
    for c in (SYM, GEN):
        cubic = lambda t: 4 * t ** 3 - c.g2 * t - c.g3
        w1, _ = quad(lambda t: 1.0 / np.sqrt(cubic(t)), c.e1, np.inf)
        w3, _ = quad(lambda t: 1.0 / np.sqrt(-cubic(t)), -np.inf, c.e3)
        assert abs(c.omega1 - w1) < 1e-10
        assert abs(c.omega3.imag - w3) < 1e-10


def test_degenerate_gap_rejected():
    with pytest.raises(DegenerateGap):
        curve_from_bands(BandStructure((0.0, 1.0, 1.0 + 1e-15)))


def test_wp_differential_equation():
    rng = np.random.default_rng(4)
    for c in (SYM, GEN):
        for _ in range(20):
            u = complex(rng.uniform(0.05, 2 * c.omega1),
                        rng.uniform(0.05, 2 * c.omega3.imag))
            p = wp(u, c)
            dp = wp(u, c, order=1)
            res = dp ** 2 - (4 * p ** 3 - c.g2 * p - c.g3)
            assert abs(res) < 1e-11 * (1 + abs(p) ** 3)


def test_wp_half_period_values():
    for c in (SYM, GEN):
        assert abs(wp(c.omega1, c) - c.e1) < 1e-12
        assert abs(wp(c.omega3, c) - c.e3) < 1e-12
        assert abs(wp(c.omega1 + c.omega3, c) - c.e2) < 1e-12
        assert abs(wp(c.omega1, c, order=1)) < 1e-10


def test_wp_periodicity():
    u = 0.37 + 0.48j
    for c in (SYM, GEN):
        p = wp(u, c)
        assert abs(wp(u + 2 * c.omega1, c) - p) < 1e-11
        assert abs(wp(u + 2 * c.omega3, c) - p) < 1e-11


def test_wp_higher_derivatives():
    u = 0.41 + 0.29j
    for c in (SYM, GEN):
        p, dp = wp(u, c), wp(u, c, order=1)
        assert abs(wp(u, c, order=2) - (6 * p * p - c.g2 / 2)) < 1e-12 * (1 + abs(p) ** 2)
        assert abs(wp(u, c, order=3) - 12 * p * dp) < 1e-12 * (1 + abs(p * dp))
        # cross-check second derivative by finite differences
        h = 1e-5
        fd = (wp(u + h, c) - 2 * p + wp(u - h, c)) / h ** 2
        assert abs(fd - wp(u, c, order=2)) < 1e-4


def test_wp_inverts_the_defining_integral():
    # u(p0) = int_{p0}^inf dt / sqrt(4t^3 - g2 t - g3), then wp(u) = p0
    for c in (SYM, GEN):
        for p0 in (c.e1 + 0.5, c.e1 + 2.0):
            cubic = lambda t: 4 * t ** 3 - c.g2 * t - c.g3
            u, err = quad(lambda t: 1.0 / np.sqrt(cubic(t)), p0, np.inf)
            assert err < 1e-8
            assert abs(wp(u, c) - p0) < 1e-8


def test_wp_pole_proximity():
    with pytest.raises(PoleProximity):
        wp(1e-9, SYM)
