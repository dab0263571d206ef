import numpy as np
import pytest

from finiteband.bands import BandStructure
from finiteband.errors import NotPolynomial, NotSelfAdjoint
from finiteband.linalg import herm_eig, opnorm
from finiteband.pencils import (
    MatrixPencil,
    PencilQuadruple,
    build_G_from_F,
    build_H_from_F,
    check_quadruple,
    classify,
    pencil_eval,
)
from finiteband.potentials import (
    HochstadtPotential,
    HochstadtSpec,
    borg_pencils,
    closed_form_pencils_n1,
    divisor_from_profile,
    random_unitary,
)

B012 = BandStructure((0.0, 1.0, 2.0))


def one_gap_quadruple(m=1, x=0.4, seed=7):
    if m == 1:
        spec = HochstadtSpec(B012, [0.3], np.eye(1))
    else:
        spec = HochstadtSpec(B012, [0.3 + 0.8 * k for k in range(m)],
                             random_unitary(m, seed))
    pot = HochstadtPotential(spec)
    q4 = closed_form_pencils_n1(pot(x, 0), pot(x, 1), pot(x, 2), B012)
    return pot, q4


def test_pencil_eval_examples():
    C = np.array([[1.0, 2.0], [2.0, -1.0]], dtype=complex)
    P = MatrixPencil(np.stack([C, np.eye(2, dtype=complex)]))
    assert np.allclose(pencil_eval(P, 0.0), C)
    P2 = MatrixPencil(np.stack([np.zeros((2, 2)), np.zeros((2, 2)), np.eye(2)]))
    assert np.allclose(pencil_eval(P2, 1j), -np.eye(2))


def test_pencil_eval_F1_at_minus_c1():
    pot, q4 = one_gap_quadruple()
    c1 = -(0.0 + 1.0 + 2.0) / 2.0
    assert np.allclose(q4.F(-c1), pot(0.4, 0) / 2.0)


def test_pencil_json_roundtrip():
    _, q4 = one_gap_quadruple(m=2)
    q4b = PencilQuadruple.from_json(q4.to_json())
    for a, b in ((q4.F, q4b.F), (q4.G1, q4b.G1), (q4.G2, q4b.G2), (q4.H, q4b.H)):
        assert np.allclose(a.coeffs, b.coeffs)
    assert q4b.bands.edges == q4.bands.edges


def test_classify_scalar_quadratic():
    a, b = -1.0, 2.0
    P = MatrixPencil(np.array([a * b, -(a + b), 1.0]))
    res = classify(P)
    assert res.kind in ("hyperbolic", "strongly hyperbolic")
    lo0, hi0 = res.zones[0]
    lo1, hi1 = res.zones[1]
    assert abs(lo0 - a) < 1e-8 and abs(hi0 - a) < 1e-8
    assert abs(lo1 - b) < 1e-8 and abs(hi1 - b) < 1e-8


def test_classify_linear_zone_matches_spectrum():
    rng = np.random.default_rng(2)
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    A = (A + A.conj().T) / 2
    P = MatrixPencil(np.stack([A, np.eye(3, dtype=complex)]))
    res = classify(P, samples=2048)
    dec = herm_eig(A)
    lo, hi = res.zones[0]
    # the root of (f, (z I + A) f) is -(f, A f); its range is exactly
    # [-max eig, -min eig], met at the eigenvector directions
    assert abs(lo - (-dec.eigenvalues[-1])) < 1e-10
    assert abs(hi - (-dec.eigenvalues[0])) < 1e-10


def test_classify_one_gap_F_in_gap():
    _, q4 = one_gap_quadruple(m=2)
    res = classify(q4.F, samples=512)
    assert res.kind == "strongly hyperbolic"
    lo, hi = res.zones[0]
    assert 1.0 - 1e-9 <= lo and hi <= 2.0 + 1e-9


def test_classify_rejects_nonselfadjoint():
    P = MatrixPencil(np.stack([np.array([[0.0, 1.0], [0.0, 0.0]]),
                               np.eye(2)]).astype(complex))
    with pytest.raises(NotSelfAdjoint):
        classify(P)


def test_check_quadruple_constant_family_exact():
    q4 = borg_pencils(-2.0, 3)
    report = check_quadruple(q4, [0.3 + 1j, -5.0, 2.0 - 0.7j])
    assert report["max_residual"] == 0.0
    assert report["pass"]


def test_check_quadruple_one_gap():
    _, q4 = one_gap_quadruple(m=2)
    rng = np.random.default_rng(3)
    zs = rng.uniform(-10, 10, 50) + 1j * rng.uniform(-10, 10, 50)
    report = check_quadruple(q4, zs)
    assert report["max_residual"] < 1e-10
    assert all(report["structure"].values())


def test_check_quadruple_detects_corruption():
    _, q4 = one_gap_quadruple()
    bad = PencilQuadruple(
        F=q4.F, G1=q4.G1, G2=q4.G2,
        H=MatrixPencil(q4.H.coeffs + 1e-4 * np.eye(1)[None]),
        bands=q4.bands,
    )
    report = check_quadruple(bad, [0.3 + 1j, 2.0 - 0.7j])
    assert not report["pass"]
    assert report["max_residual"] > 1e-6


def test_build_G_scalar_cancellation():
    mu = 1.5
    F = MatrixPencil(np.array([-mu, 1.0]))
    gamma = np.array([[np.sqrt(0.375)]])   # |R(1.5)|^{1/2}
    G1, G2 = build_G_from_F(F, [(mu, +1, gamma)])
    assert G1.degree == 0
    assert np.isclose(G1.coeffs[0, 0, 0], np.sqrt(0.375))
    # flipped sign negates the result
    G1f, _ = build_G_from_F(F, [(mu, -1, gamma)])
    assert np.allclose(G1f.coeffs, -G1.coeffs)


def test_build_G_and_H_match_closed_form():
    for m in (1, 2):
        pot, q4 = one_gap_quadruple(m=m)
        div = divisor_from_profile(pot(0.4, 0), pot(0.4, 1), B012)
        G1, G2 = build_G_from_F(q4.F, div)
        assert opnorm(G1.coeffs[0] - q4.G1.coeffs[0]) < 1e-10
        assert opnorm(G2.coeffs[0] - q4.G2.coeffs[0]) < 1e-10
        H = build_H_from_F(q4.F, div, B012)
        assert max(opnorm(a - b) for a, b in zip(H.coeffs, q4.H.coeffs)) < 1e-9


def test_build_H_residual_identity_on_grid():
    pot, q4 = one_gap_quadruple(m=2)
    div = divisor_from_profile(pot(0.4, 0), pot(0.4, 1), B012)
    H = build_H_from_F(q4.F, div, B012)
    G1, G2 = build_G_from_F(q4.F, div)
    rebuilt = PencilQuadruple(F=q4.F, G1=G1, G2=G2, H=H, bands=B012)
    report = check_quadruple(rebuilt, [1j, 3.0 + 0.5j, -2.0 + 2j])
    assert report["pass"]


def test_build_G_rejects_inconsistent_divisor():
    mu = 1.5
    F = MatrixPencil(np.array([-1.2, 1.0]))   # root at 1.2, not mu
    with pytest.raises(NotPolynomial):
        build_G_from_F(F, [(mu, +1, np.array([[0.5]]))])
