import numpy as np
import pytest

from finiteband.bands import BandStructure, eval_R, sqrt_R

B012 = BandStructure((0.0, 1.0, 2.0))


def test_band_structure_validation():
    with pytest.raises(ValueError):
        BandStructure((0.0, 1.0))          # even count
    with pytest.raises(ValueError):
        BandStructure((0.0, 0.0, 1.0))     # not strictly increasing
    assert B012.n == 1
    assert B012.bands() == [(0.0, 1.0), (2.0, np.inf)]
    assert B012.gaps() == [(1.0, 2.0)]


def test_eval_R_examples():
    assert eval_R(3.0, B012) == 6.0
    assert eval_R(0.5, B012) == 0.375
    assert eval_R(-4.0, BandStructure((-4.0,))) == 0.0


def test_sqrt_R_sign_table():
    # half-line: positive real
    assert np.isclose(sqrt_R(3.0, B012), np.sqrt(6.0))
    # below the spectrum: (-1)^n * i * |R|^{1/2} with n = 1
    assert np.isclose(sqrt_R(-1.0, B012), -1j * np.sqrt(6.0))
    # band interior (j = 0 row): -|R|^{1/2}
    assert np.isclose(sqrt_R(0.5, B012), -np.sqrt(0.375))
    # gap (j = 1 row): +i |R|^{1/2}
    assert np.isclose(sqrt_R(1.5, B012), 1j * np.sqrt(0.375))


def test_sqrt_R_sign_table_two_gaps():
    b = BandStructure((0.0, 1.0, 2.0, 3.0, 4.0))   # n = 2
    # below: (-1)^2 i = +i
    v = sqrt_R(-1.0, b)
    assert v.real == pytest.approx(0.0, abs=1e-13) and v.imag > 0
    # first gap (j=1): (-1)^{n+j} i = -i
    v = sqrt_R(1.5, b)
    assert v.imag < 0 and abs(v.real) < 1e-13
    # second band (j=1 band row): (-1)^{n+j} = -1
    v = sqrt_R(2.5, b)
    assert v.real < 0 and abs(v.imag) < 1e-13


def test_sqrt_R_conjugation_symmetry():
    rng = np.random.default_rng(0)
    zs = rng.uniform(-5, 5, 1000) + 1j * rng.uniform(1e-6, 5, 1000)
    for z in zs:
        lhs = np.conj(sqrt_R(np.conj(z), B012))
        rhs = -sqrt_R(z, B012)
        assert abs(lhs - rhs) < 1e-13 * (1 + abs(rhs))


def test_sqrt_R_square_consistency():
    rng = np.random.default_rng(1)
    zs = rng.uniform(-5, 5, 200) + 1j * rng.uniform(-5, 5, 200)
    for z in zs:
        assert abs(sqrt_R(z, B012) ** 2 - eval_R(z, B012)) \
            < 1e-13 * (1 + abs(eval_R(z, B012)))


def test_sqrt_R_continuity_on_circle():
    # analyticity probe in the upper half-plane
    theta = np.linspace(0, 2 * np.pi, 400)
    zs = 1.0 + 2.0j + 0.8 * np.exp(1j * theta)
    vals = np.array([sqrt_R(z, B012) for z in zs])
    jumps = np.abs(np.diff(vals))
    assert jumps.max() < 0.1


def test_sqrt_R_lower_side():
    # explicit lower-side boundary values conjugate the upper ones
    lam = 0.5
    up = sqrt_R(lam, B012, side=+1)
    dn = sqrt_R(lam, B012, side=-1)
    assert np.isclose(dn, -np.conj(up))


def test_sqrt_R_at_edge_is_zero():
    assert sqrt_R(1.0, B012) == 0.0
