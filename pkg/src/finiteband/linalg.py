"""Dense Hermitian linear algebra: spectral resolutions, functional
calculus, and commutators for small complex matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, DomainError, NotHermitian

DEFAULT_HERM_TOL = 1e-10
CLUSTER_TOL = 1e-10


def opnorm(A):
    """Operator (spectral) norm."""
    A = np.asarray(A)
    if A.ndim == 0:
        return abs(complex(A))
    return float(np.linalg.norm(A, 2))


def hermitize(A):
    return (A + A.conj().T) / 2


@dataclass
class SpectralDecomposition:
    """Resolution of identity for a Hermitian matrix.

    eigenvalues are ascending; projections[k] is the Hermitian
    idempotent onto the (possibly clustered) eigenspace of
    eigenvalues[k], and they sum to the identity.
    """

    eigenvalues: np.ndarray
    projections: list

    def reconstruct(self):
        out = np.zeros_like(self.projections[0])
        for q, P in zip(self.eigenvalues, self.projections):
            out = out + q * P
        return out

    def apply(self, f):
        """sum_k f(q_k) P_k"""
        out = np.zeros_like(self.projections[0])
        for q, P in zip(self.eigenvalues, self.projections):
            out = out + complex(f(q)) * P
        return out


def herm_eig(A, herm_tol=None, cluster_tol=None) -> SpectralDecomposition:
    """Spectral decomposition of a Hermitian matrix.

    Eigenvalues closer than cluster_tol * ||A|| are merged into a single
    projection so the resolution of identity stays well conditioned.
    """
    A = np.asarray(A, dtype=complex)
    scale = max(opnorm(A), 1e-300)
    if herm_tol is None:
        herm_tol = DEFAULT_HERM_TOL * scale
    if cluster_tol is None:
        cluster_tol = CLUSTER_TOL * scale
    if opnorm(A - A.conj().T) > herm_tol:
        raise NotHermitian(f"deviation {opnorm(A - A.conj().T):.3e} exceeds {herm_tol:.3e}")
    w, V = np.linalg.eigh(hermitize(A))
    # cluster near-degenerate eigenvalues
    groups = []
    start = 0
    for k in range(1, len(w) + 1):
        if k == len(w) or w[k] - w[k - 1] > cluster_tol:
            groups.append((start, k))
            start = k
    eigenvalues = []
    projections = []
    for a, b in groups:
        vecs = V[:, a:b]
        eigenvalues.append(float(np.mean(w[a:b])))
        projections.append(vecs @ vecs.conj().T)
    return SpectralDecomposition(np.array(eigenvalues), projections)


def mat_func(A, f, herm_tol=None):
    """Functional calculus sum_k f(q_k) P_k for Hermitian A."""
    dec = herm_eig(A, herm_tol=herm_tol)
    try:
        vals = [complex(f(q)) for q in dec.eigenvalues]
    except (ValueError, ZeroDivisionError, FloatingPointError) as exc:
        raise DomainError(str(exc)) from exc
    if any(not np.isfinite(v) for v in vals):
        raise DomainError("f undefined (non-finite) at an eigenvalue")
    out = np.zeros_like(dec.projections[0])
    for v, P in zip(vals, dec.projections):
        out = out + v * P
    return out


def commutator_norm(A, B):
    """Operator norm of AB - BA."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimMismatch(f"shapes {A.shape} and {B.shape}")
    return opnorm(A @ B - B @ A)
