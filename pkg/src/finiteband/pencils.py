"""Polynomial matrix pencils: evaluation, the hyperbolicity taxonomy,
construction of the off-diagonal and complementary pencils from a monic
pencil plus divisor data, and the algebraic identity ledger."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bands import BandStructure, eval_R
from .errors import LeadingNotPositive, NotPolynomial, NotSelfAdjoint
from .linalg import herm_eig, opnorm

SELFADJOINT_TOL = 1e-10
LEDGER_TOL = 1e-10


@dataclass
class MatrixPencil:
    """A(z) = sum_k coeffs[k] z^k with m x m complex coefficients."""

    coeffs: np.ndarray  # shape (degree+1, m, m), index = power

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim == 1:  # scalar pencil given as a coefficient vector
            c = c.reshape(-1, 1, 1)
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise ValueError("coeffs must have shape (degree+1, m, m)")
        self.coeffs = c

    @property
    def dim(self):
        return self.coeffs.shape[1]

    @property
    def degree(self):
        return self.coeffs.shape[0] - 1

    def __call__(self, z):
        """Horner evaluation."""
        out = np.array(self.coeffs[-1])
        for k in range(self.degree - 1, -1, -1):
            out = out * complex(z) + self.coeffs[k]
        return out

    def scale(self):
        return max(opnorm(c) for c in self.coeffs)

    def is_selfadjoint(self, tol=SELFADJOINT_TOL):
        s = max(self.scale(), 1e-300)
        return all(opnorm(c - c.conj().T) <= tol * s for c in self.coeffs)

    def is_monic(self, tol=SELFADJOINT_TOL):
        return opnorm(self.coeffs[-1] - np.eye(self.dim)) <= tol

    def adjoint(self):
        """Pencil with coefficients conjugate-transposed: z -> A(conj z)^*."""
        return MatrixPencil(np.conj(np.transpose(self.coeffs, (0, 2, 1))))

    def to_json(self):
        return {
            "dim": self.dim,
            "degree": self.degree,
            "coeffs": [
                [[[float(v.real), float(v.imag)] for v in row] for row in c]
                for c in self.coeffs
            ],
        }

    @classmethod
    def from_json(cls, obj):
        coeffs = np.array(
            [[[complex(v[0], v[1]) for v in row] for row in c] for c in obj["coeffs"]]
        )
        p = cls(coeffs)
        if p.dim != obj["dim"] or p.degree != obj["degree"]:
            raise ValueError("inconsistent pencil header")
        return p


def pencil_eval(P: MatrixPencil, z):
    return P(z)


@dataclass
class ClassifyResult:
    kind: str  # "self-adjoint" | "weakly hyperbolic" | "hyperbolic" | "strongly hyperbolic"
    zones: list = field(default_factory=list)  # [(lo, hi)] per ordered root


def classify(P: MatrixPencil, samples=512, seed=0, real_tol=1e-8):
    """Sampled taxonomy of a self-adjoint pencil with positive leading term.

    Root zones are inner approximations: the range of each ordered root
    of (f, A(.)f) over pseudo-random unit directions f plus the
    eigenvector directions of every coefficient.
    """
    if not P.is_selfadjoint():
        raise NotSelfAdjoint("pencil coefficients are not all Hermitian")
    top = herm_eig(P.coeffs[-1])
    if top.eigenvalues[0] <= 0:
        raise LeadingNotPositive(f"min eigenvalue {top.eigenvalues[0]:.3e}")
    m = P.dim
    rng = np.random.default_rng(seed)
    directions = []
    for c in P.coeffs:
        _, V = np.linalg.eigh((c + c.conj().T) / 2)
        directions.extend(V.T)
    raw = rng.normal(size=(samples, m)) + 1j * rng.normal(size=(samples, m))
    directions.extend(raw)
    deg = P.degree
    scale = max(abs(e) for e in np.ravel([np.abs(c).max() for c in P.coeffs])) + 1.0
    lo = np.full(deg, np.inf)
    hi = np.full(deg, -np.inf)
    all_real = True
    all_distinct = True
    for f in directions:
        f = np.asarray(f, dtype=complex)
        nf = np.linalg.norm(f)
        if nf == 0:
            continue
        f = f / nf
        # highest power first for np.roots
        poly = np.array([np.real(np.vdot(f, c @ f)) for c in P.coeffs[::-1]])
        roots = np.roots(poly)
        if np.any(np.abs(roots.imag) > real_tol * scale):
            all_real = False
            break
        r = np.sort(roots.real)
        if np.any(np.diff(r) <= real_tol * scale):
            all_distinct = False
        lo = np.minimum(lo, r)
        hi = np.maximum(hi, r)
    if not all_real:
        return ClassifyResult("self-adjoint")
    zones = list(zip(lo.tolist(), hi.tolist()))
    if not all_distinct:
        return ClassifyResult("weakly hyperbolic", zones)
    disjoint = all(zones[j][1] < zones[j + 1][0] for j in range(deg - 1))
    return ClassifyResult("strongly hyperbolic" if disjoint else "hyperbolic", zones)


def _divisor_sum(divisor, z):
    """sum_k eps_k Gamma_k / (z - mu_k)."""
    out = None
    for mu, eps, gamma in divisor:
        term = (eps / (complex(z) - mu)) * np.asarray(gamma, dtype=complex)
        out = term if out is None else out + term
    return out


def _fit_pencil(eval_fn, degree, m, radius, pole_points=(), tol=1e-8, scale=1.0):
    """Fit a polynomial pencil of the given degree to eval_fn.

    Evaluates on a circle of the given radius and reads coefficients by
    the discrete Fourier transform; energy aliased into powers above
    `degree` (the fingerprint of a leftover pole inside the circle)
    raises NotPolynomial, as does a residual pole at any pole_point.
    """
    K = max(4 * (degree + 1), 16)
    js = np.arange(K)
    nodes = radius * np.exp(2j * np.pi * js / K)
    vals = np.array([eval_fn(z) for z in nodes])  # (K, m, m)
    # forward DFT projects onto e^{-2 pi i jk/K}, i.e. the z^k mode
    coeffs = np.fft.fft(vals, axis=0) / K / (radius ** js)[:, None, None]
    tail = max(opnorm(coeffs[k]) for k in range(degree + 1, K))
    if tail > tol * scale:
        raise NotPolynomial(f"aliased tail {tail:.3e} exceeds {tol * scale:.3e}")
    pencil = MatrixPencil(coeffs[: degree + 1])
    for mu in pole_points:
        # probe distance large enough that the cancelling pole pair is
        # not evaluated in the catastrophic-cancellation regime
        delta = 1e-3 * (1.0 + abs(mu))
        res = delta * opnorm(eval_fn(mu + 1j * delta) - pencil(mu + 1j * delta))
        if res > tol * scale * (1.0 + abs(mu)):
            raise NotPolynomial(f"pole residual {res:.3e} at mu={mu}")
    return pencil


def _fit_radius(divisor, extra=()):
    vals = [abs(mu) for mu, _, _ in divisor] + [abs(v) for v in extra]
    return 2.0 * (1.0 + max(vals, default=0.0))


def build_G_from_F(F: MatrixPencil, divisor, tol=1e-8):
    """Off-diagonal pencils from the monic pencil and its divisor.

    The rational products (sum_k eps_k Gamma_k / (z - mu_k)) F(z) and
    F(z) (sum ...) simplify to polynomial pencils of degree <= n-1; the
    fit certifies the cancellation of every pole.
    """
    n = F.degree
    m = F.dim
    radius = _fit_radius(divisor, extra=[F.scale()])
    scale = F.scale() * max((opnorm(g) for _, _, g in divisor), default=1.0)
    if not divisor or n == 0:
        zero = MatrixPencil(np.zeros((1, m, m)))
        return zero, MatrixPencil(np.zeros((1, m, m)))
    mus = [mu for mu, _, _ in divisor]
    g1 = _fit_pencil(
        lambda z: _divisor_sum(divisor, z) @ F(z),
        n - 1, m, radius, pole_points=mus, tol=tol, scale=scale,
    )
    g2 = _fit_pencil(
        lambda z: F(z) @ _divisor_sum(divisor, z),
        n - 1, m, radius, pole_points=mus, tol=tol, scale=scale,
    )
    return g1, g2


def build_H_from_F(F: MatrixPencil, divisor, b: BandStructure, tol=1e-8):
    """Monic degree-(n+1) complementary pencil.

    H(z) = R(z) F(z)^{-1} + S(z) F(z) S(z) with S the divisor sum; the
    poles of both terms cancel, leaving a self-adjoint polynomial."""
    n = F.degree
    m = F.dim
    radius = _fit_radius(divisor, extra=[F.scale()] + [abs(e) for e in b.edges])
    scale = radius ** (n + 1)

    def h_eval(z):
        val = eval_R(z, b) * np.linalg.inv(F(z))
        if divisor:
            S = _divisor_sum(divisor, z)
            val = val + S @ F(z) @ S
        return val

    mus = [mu for mu, _, _ in divisor]
    H = _fit_pencil(h_eval, n + 1, m, radius, pole_points=mus, tol=tol, scale=scale)
    return H


@dataclass
class PencilQuadruple:
    """The four pencils tied to one band structure at a fixed point."""

    F: MatrixPencil
    G1: MatrixPencil
    G2: MatrixPencil
    H: MatrixPencil
    bands: BandStructure

    @property
    def dim(self):
        return self.F.dim

    def to_json(self):
        return {
            "F": self.F.to_json(),
            "G1": self.G1.to_json(),
            "G2": self.G2.to_json(),
            "H": self.H.to_json(),
            "bands": list(self.bands.edges),
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            F=MatrixPencil.from_json(obj["F"]),
            G1=MatrixPencil.from_json(obj["G1"]),
            G2=MatrixPencil.from_json(obj["G2"]),
            H=MatrixPencil.from_json(obj["H"]),
            bands=BandStructure(tuple(obj["bands"])),
        )


def check_quadruple(q4: PencilQuadruple, zs, ledger_tol=LEDGER_TOL):
    """Residual report for the algebraic identity ledger on a z-grid.

    Residuals are relative to 1 + |R(z)|.  The report also carries the
    structural degree/monicity facts.
    """
    F, G1, G2, H = q4.F, q4.G1, q4.G2, q4.H
    b = q4.bands
    m = q4.dim
    names = [
        "conjugation-symmetry",      # F(conj z)^* = F(z), same for H; G2 <-> G1
        "FG1-equals-G2F",
        "HG2-equals-G1H",
        "HF-minus-G1sq",
        "FH-minus-G2sq",
    ]
    residuals = {name: 0.0 for name in names}
    for z in zs:
        z = complex(z)
        R = eval_R(z, b)
        s = 1.0 + abs(R)
        Fz, G1z, G2z, Hz = F(z), G1(z), G2(z), H(z)
        Fc, G1c, G2c, Hc = F(np.conj(z)), G1(np.conj(z)), G2(np.conj(z)), H(np.conj(z))
        sym = max(
            opnorm(Fc.conj().T - Fz),
            opnorm(Hc.conj().T - Hz),
            opnorm(G2c.conj().T - G1z),
        )
        residuals["conjugation-symmetry"] = max(
            residuals["conjugation-symmetry"], sym / (1.0 + opnorm(Fz) + opnorm(Hz))
        )
        residuals["FG1-equals-G2F"] = max(
            residuals["FG1-equals-G2F"], opnorm(Fz @ G1z - G2z @ Fz) / s
        )
        residuals["HG2-equals-G1H"] = max(
            residuals["HG2-equals-G1H"], opnorm(Hz @ G2z - G1z @ Hz) / s
        )
        residuals["HF-minus-G1sq"] = max(
            residuals["HF-minus-G1sq"],
            opnorm(Hz @ Fz - G1z @ G1z - R * np.eye(m)) / s,
        )
        residuals["FH-minus-G2sq"] = max(
            residuals["FH-minus-G2sq"],
            opnorm(Fz @ Hz - G2z @ G2z - R * np.eye(m)) / s,
        )
    n = b.n
    structure = {
        "F-monic-degree-n": F.is_monic() and F.degree == n,
        "H-monic-degree-n+1": H.is_monic() and H.degree == n + 1,
        "G-degree-at-most-n-1": max(G1.degree, G2.degree) <= max(n - 1, 0),
        "F-selfadjoint": F.is_selfadjoint(),
        "H-selfadjoint": H.is_selfadjoint(),
    }
    return {
        "residuals": residuals,
        "structure": structure,
        "max_residual": max(residuals.values()),
        "pass": max(residuals.values()) < ledger_tol and all(structure.values()),
        "tol": ledger_tol,
    }
