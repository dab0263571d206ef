import numpy as np
import pytest

from finiteband.errors import DimMismatch, DomainError, NotHermitian
from finiteband.linalg import commutator_norm, herm_eig, mat_func, opnorm


def random_hermitian(m, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    return (A + A.conj().T) / 2


def test_herm_eig_diagonal():
    dec = herm_eig(np.diag([2.0, 1.0]).astype(complex))
    assert np.allclose(dec.eigenvalues, [1.0, 2.0])
    assert np.allclose(dec.projections[0], np.diag([0.0, 1.0]))
    assert np.allclose(dec.projections[1], np.diag([1.0, 0.0]))


def test_herm_eig_identity_clusters():
    dec = herm_eig(np.eye(3, dtype=complex))
    assert len(dec.projections) == 1
    assert np.allclose(dec.eigenvalues, [1.0])
    assert np.allclose(dec.projections[0], np.eye(3))


def test_herm_eig_reconstruction():
    for seed in range(5):
        A = random_hermitian(3, seed)
        dec = herm_eig(A)
        assert opnorm(dec.reconstruct() - A) < 1e-12 * (1 + opnorm(A))
        # resolution of identity and idempotency
        total = sum(dec.projections)
        assert opnorm(total - np.eye(3)) < 1e-12
        for P in dec.projections:
            assert opnorm(P @ P - P) < 1e-12
            assert opnorm(P - P.conj().T) < 1e-12


def test_herm_eig_rejects_nonhermitian():
    with pytest.raises(NotHermitian):
        herm_eig(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))


def test_mat_func_identity_and_square():
    A = random_hermitian(3, 11)
    assert opnorm(mat_func(A, lambda t: t) - A) < 1e-12
    B = np.diag([1.0, -2.0]).astype(complex)
    assert np.allclose(mat_func(B, lambda t: t * t), np.diag([1.0, 4.0]))


def test_mat_func_composition():
    A = random_hermitian(4, 3)
    f = lambda t: t ** 2 + 1.0
    g = lambda t: 2.0 * t - 3.0
    direct = mat_func(A, lambda t: f(g(t)))
    chained = mat_func(mat_func(A, g), f)
    assert opnorm(direct - chained) < 1e-10 * (1 + opnorm(direct))


def test_mat_func_domain_error():
    A = np.diag([1.0, 0.0]).astype(complex)
    with np.errstate(divide="ignore"), pytest.raises(DomainError):
        mat_func(A, lambda t: 1.0 / t)


def test_commutator_norm():
    A = random_hermitian(3, 5)
    assert commutator_norm(A, A) == 0.0
    assert commutator_norm(np.diag([1.0, 2.0]), np.diag([3.0, 4.0])) == 0.0
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    sz = np.array([[1.0, 0.0], [0.0, -1.0]])
    # brute-force product as the oracle
    assert np.isclose(commutator_norm(sx, sz), opnorm(sx @ sz - sz @ sx))
    with pytest.raises(DimMismatch):
        commutator_norm(np.eye(2), np.eye(3))
