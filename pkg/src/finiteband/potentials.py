"""Closed-form reflectionless potential families.

The constant family (no spectral gap) is Q = E0*I.  The one-gap family
conjugates a diagonal of shifted elliptic functions by a fixed unitary,
which makes {Q(x), Q'(x), Q''(x), ...} a commuting Hermitian family
with a common eigenbasis.  The divisor (gap points and weights) is read
back from the spectral resolution of Q.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bands import BandStructure, eval_R, sqrt_R
from .elliptic import EllipticCurve, curve_from_bands, wp
from .errors import ZoneViolation
from .jets import jet_const
from .linalg import herm_eig, opnorm
from .pencils import MatrixPencil, PencilQuadruple

HERM_IMAG_TOL = 1e-11
ZONE_MARGIN = 1e-9


@dataclass
class PotentialProfile:
    """Sampled Hermitian potential with first three derivatives."""

    xs: np.ndarray
    Q: np.ndarray      # (N, m, m)
    Qp: np.ndarray
    Qpp: np.ndarray
    Qppp: np.ndarray

    @property
    def dim(self):
        return self.Q.shape[1]

    def jet(self, i):
        """Order-3 jet (value and three derivatives) at grid index i."""
        return np.stack([self.Q[i], self.Qp[i], self.Qpp[i], self.Qppp[i]])

    def max_hermitian_defect(self):
        return max(
            opnorm(a - a.conj().T)
            for block in (self.Q, self.Qp, self.Qpp, self.Qppp)
            for a in block
        )


def borg_potential(E0, m, xs):
    """Constant potential E0*I with vanishing derivatives."""
    xs = np.asarray(xs, dtype=float)
    N = len(xs)
    Q = np.tile(E0 * np.eye(m, dtype=complex), (N, 1, 1))
    zero = np.zeros((N, m, m), dtype=complex)
    return PotentialProfile(xs, Q, zero, zero.copy(), zero.copy())


def random_unitary(m, seed):
    """Haar-style unitary from QR of a seeded complex Gaussian matrix."""
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    Qm, Rm = np.linalg.qr(A)
    d = np.diag(Rm)
    return Qm * (d / np.abs(d))


@dataclass
class HochstadtSpec:
    """One-gap family parameters: bands, phase shifts, conjugating unitary."""

    bands: BandStructure
    alphas: np.ndarray
    U: np.ndarray

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=float)
        self.U = np.asarray(self.U, dtype=complex)
        m = len(self.alphas)
        if self.U.shape != (m, m):
            raise ValueError("U must be m x m with m = len(alphas)")
        if opnorm(self.U.conj().T @ self.U - np.eye(m)) > 1e-12:
            raise ValueError("U is not unitary")
        if self.bands.n != 1:
            raise ValueError("the one-gap family needs exactly three edges")

    @property
    def dim(self):
        return len(self.alphas)


class HochstadtPotential:
    """Evaluator Q(x) = s*I + 2 U diag(p(x + w3 + alpha_j)) U*.

    The argument x + w3 + alpha sits at half the imaginary period for
    real x, so it never meets the lattice and Q stays real-analytic.
    """

    def __init__(self, spec: HochstadtSpec):
        self.spec = spec
        self.curve = curve_from_bands(spec.bands)
        edges = spec.bands.edges
        self.s = sum(edges) / 3.0

    @property
    def period(self):
        return 2.0 * self.curve.omega1

    def diag_values(self, x, order=0):
        c = self.curve
        vals = np.array(
            [wp(x + c.omega3 + a, c, order=order) for a in self.spec.alphas]
        )
        if np.max(np.abs(vals.imag)) > HERM_IMAG_TOL * (1.0 + np.max(np.abs(vals))):
            raise ValueError("elliptic diagonal drifted off the real axis")
        return vals.real

    def __call__(self, x, order=0):
        U = self.spec.U
        d = self.diag_values(x, order=order)
        out = 2.0 * (U * d) @ U.conj().T
        if order == 0:
            out = out + self.s * np.eye(self.spec.dim)
        return out

    def jet(self, x):
        return np.stack([self(x, order=k) for k in range(4)])

    def profile(self, xs):
        xs = np.asarray(xs, dtype=float)
        stacks = [[self(x, order=k) for x in xs] for k in range(4)]
        return PotentialProfile(xs, *(np.array(s) for s in stacks))


def hochstadt_scalar(x, alpha, b: BandStructure, curve: EllipticCurve = None):
    """Scalar one-gap potential value and first three derivatives."""
    c = curve if curve is not None else curve_from_bands(b)
    s = sum(b.edges) / 3.0
    u = x + c.omega3 + alpha
    vals = [wp(u, c, order=k) for k in range(4)]
    if max(abs(v.imag) for v in vals) > HERM_IMAG_TOL * (1.0 + max(abs(v) for v in vals)):
        raise ValueError("scalar potential drifted off the real axis")
    q = s + 2.0 * vals[0].real
    return q, 2.0 * vals[1].real, 2.0 * vals[2].real, 2.0 * vals[3].real


def hochstadt_matrix(spec: HochstadtSpec, xs):
    return HochstadtPotential(spec).profile(xs)


def c1_coeff(b: BandStructure):
    """Leading correction constant for the one-gap family."""
    E0, E1, E2 = b.edges
    return -(E0 + E1 + E2) / 2.0


def divisor_from_Q1(Q, b: BandStructure, margin=ZONE_MARGIN):
    """Gap points and spectral projections read from Q at one x.

    mu_k = -q_k/2 - c1 for each eigenvalue q_k of Q; every mu_k must lie
    in the closed gap [E1, E2].
    """
    c1 = c1_coeff(b)
    dec = herm_eig(Q)
    E0, E1, E2 = b.edges
    tol = margin * (1.0 + abs(E1) + abs(E2))
    out = []
    for q, P in zip(dec.eigenvalues, dec.projections):
        mu = -q / 2.0 - c1
        if not (E1 - tol <= mu <= E2 + tol):
            raise ZoneViolation(f"mu={mu} outside the gap [{E1}, {E2}]")
        out.append((float(np.clip(mu, E1, E2)), P))
    return out


def divisor_from_profile(Q, Qp, b: BandStructure, margin=ZONE_MARGIN):
    """Full divisor (mu, eps, Gamma) from Q and Q' at one x.

    Gamma_k = |R(mu_k)|^{1/2} P_k >= 0; the sign eps_k is fixed by
    matching the weighted sum to -Q'/4 on each eigenspace (eps = +1 at
    critical points of q_k, where Gamma_k = 0 anyway up to roundoff).
    """
    pairs = divisor_from_Q1(Q, b, margin=margin)
    out = []
    for mu, P in pairs:
        gamma = abs(eval_R(mu, b)) ** 0.5
        slope = np.real(np.trace(P @ np.asarray(Qp, dtype=complex))) / max(
            np.real(np.trace(P)), 1.0
        )
        eps = -1 if slope * gamma > 0 else +1
        # eps*gamma must reproduce -q'/4 on this eigenspace
        if gamma > 0 and abs(eps * gamma - (-slope / 4.0)) > 1e-6 * (1.0 + gamma):
            eps = int(np.sign(-slope / 4.0 / gamma)) or +1
        out.append((mu, eps, gamma * P))
    return out


def closed_form_pencils_n1(Q, Qp, Qpp, b: BandStructure):
    """The one-gap pencil quadruple at a point, from Q and derivatives.

    F = z I + Q/2 + c1 I
    G1 = G2 = -Q'/4
    H = z^2 I + z (-Q/2 + c1 I) + Q''/4 - Q^2/2 - c1 Q
    """
    Q = np.asarray(Q, dtype=complex)
    Qp = np.asarray(Qp, dtype=complex)
    Qpp = np.asarray(Qpp, dtype=complex)
    m = Q.shape[0]
    c1 = c1_coeff(b)
    eye = np.eye(m, dtype=complex)
    F = MatrixPencil(np.stack([Q / 2.0 + c1 * eye, eye]))
    G = MatrixPencil((-Qp / 4.0)[None, :, :])
    H = MatrixPencil(
        np.stack([Qpp / 4.0 - Q @ Q / 2.0 - c1 * Q, -Q / 2.0 + c1 * eye, eye])
    )
    return PencilQuadruple(F=F, G1=G, G2=MatrixPencil(G.coeffs.copy()), H=H, bands=b)


def constraint_residuals(Q, Qp, Qpp, b: BandStructure):
    """Pointwise algebraic constraints satisfied by the one-gap family.

    quadratic:  Q''/4 - (3/4)Q^2 - c1 Q + d1 I = 0
    cubic:      (Q''/4 - Q^2/2 - c1 Q)(Q/2 + c1 I) - (Q')^2/16
                + E0 E1 E2 I = 0
    derivative: (Q')^2 + 16 R(-Q/2 - c1 I) = 0
    Returns the operator norms of the three left sides.
    """
    Q = np.asarray(Q, dtype=complex)
    Qp = np.asarray(Qp, dtype=complex)
    Qpp = np.asarray(Qpp, dtype=complex)
    m = Q.shape[0]
    eye = np.eye(m, dtype=complex)
    E0, E1, E2 = b.edges
    c1 = c1_coeff(b)
    d1 = c1 * c1 - (E0 * E1 + E0 * E2 + E1 * E2)
    quad = Qpp / 4.0 - 0.75 * Q @ Q - c1 * Q + d1 * eye
    cubic = (Qpp / 4.0 - Q @ Q / 2.0 - c1 * Q) @ (Q / 2.0 + c1 * eye) \
        - (Qp @ Qp) / 16.0 + E0 * E1 * E2 * eye
    X = -Q / 2.0 - c1 * eye
    RX = (X - E0 * eye) @ (X - E1 * eye) @ (X - E2 * eye)
    deriv = Qp @ Qp + 16.0 * RX
    return {
        "quadratic": opnorm(quad),
        "cubic": opnorm(cubic),
        "derivative-square": opnorm(deriv),
    }


def borg_pencils(E0, m):
    """Gapless quadruple: F = I, G = 0, H = (z - E0) I."""
    eye = np.eye(m, dtype=complex)
    F = MatrixPencil(eye[None, :, :])
    G = MatrixPencil(np.zeros((1, m, m), dtype=complex))
    H = MatrixPencil(np.stack([-E0 * eye, eye]))
    return PencilQuadruple(
        F=F, G1=G, G2=MatrixPencil(G.coeffs.copy()), H=H,
        bands=BandStructure((E0,)),
    )
