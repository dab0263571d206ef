"""Half-line Weyl matrices, the full 2m x 2m Weyl matrix, boundary-value
machinery (Stieltjes inversion, the log-argument matrix, reflectionless
defect), divisor extraction, and scalar Herglotz classification.

Boundary limits onto the spectrum are taken through a geometric ladder
of imaginary offsets followed by polynomial extrapolation to zero
offset.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .bands import BandStructure, eval_R, sqrt_R
from .errors import (
    DegenerateResidue,
    ExtrapolationDiverged,
    SingularDifference,
    SingularF,
    ZoneViolation,
)
from .linalg import opnorm
from .pencils import MatrixPencil, PencilQuadruple
from .quadrature import integrate_spectrum

EPS_LADDER = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
ROOT_CLUSTER_TOL = 1e-8
RESIDUE_NODES = 64


def extrapolate_to_zero(eps, vals, divergence_factor=10.0):
    """Polynomial (Neville) extrapolation of vals(eps) to eps = 0.

    Raises if the final correction exceeds divergence_factor times the
    previous one, which signals that the samples do not follow a smooth
    trend in eps.
    """
    xs = [float(e) for e in eps]
    T = [np.asarray(v, dtype=complex) for v in vals]
    n = len(T)
    if n < 2:
        return T[0]
    prev_step = None
    for k in range(1, n):
        Tn = []
        for i in range(n - k):
            xi, xj = xs[i], xs[i + k]
            Tn.append((xj * T[i] - xi * T[i + 1]) / (xj - xi))
        step = float(np.max(np.abs(Tn[0] - T[0])))
        floor = 1e-10 * (1.0 + float(np.max(np.abs(Tn[0]))))
        if prev_step is not None and step > divergence_factor * prev_step + floor:
            raise ExtrapolationDiverged(
                f"correction grew from {prev_step:.3e} to {step:.3e}"
            )
        prev_step = step
        T = Tn
    return T[0]


def _pencil_roots(F: MatrixPencil):
    """Real spectrum of a monic pencil via the block companion matrix."""
    n, m = F.degree, F.dim
    if n == 0:
        return np.array([])
    C = np.zeros((n * m, n * m), dtype=complex)
    for k in range(n - 1):
        C[k * m:(k + 1) * m, (k + 1) * m:(k + 2) * m] = np.eye(m)
    for k in range(n):
        C[(n - 1) * m:, k * m:(k + 1) * m] = -F.coeffs[k]
    return np.linalg.eigvals(C)


def gamma_extract(F: MatrixPencil, b: BandStructure, cluster_tol=ROOT_CLUSTER_TOL):
    """Divisor data (mu_k, Gamma_k) from the singular points of F.

    Gamma_k = -i * sqrt_R(mu_k) * (residue of F^{-1} at mu_k), computed
    by a contour integral around the clustered root; it must come out
    Hermitian nonnegative.
    """
    scale = 1.0 + max(abs(e) for e in b.edges)
    roots = _pencil_roots(F)
    if len(roots) == 0:
        return []
    if np.max(np.abs(roots.imag)) > cluster_tol * scale:
        raise ZoneViolation("complex root of det F")
    mus = np.sort(roots.real)
    clusters = []
    start = 0
    for k in range(1, len(mus) + 1):
        if k == len(mus) or mus[k] - mus[k - 1] > cluster_tol * scale:
            clusters.append(float(np.mean(mus[start:k])))
            start = k
    out = []
    for mu in clusters:
        j = b.gap_index(mu, margin=cluster_tol * scale)
        if j is None:
            raise ZoneViolation(f"root mu={mu} outside the closed gaps")
        edge_dist = min(abs(mu - e) for e in b.edges)
        if edge_dist <= cluster_tol * scale:
            out.append((mu, np.zeros((F.dim, F.dim), dtype=complex)))
            continue
        others = [c for c in clusters if c != mu]
        r = 0.4 * min([edge_dist] + [abs(mu - c) for c in others])
        theta = 2.0 * np.pi * np.arange(RESIDUE_NODES) / RESIDUE_NODES
        res = np.zeros((F.dim, F.dim), dtype=complex)
        for t in theta:
            w = r * np.exp(1j * t)
            res += w * np.linalg.inv(F(mu + w))
        res /= RESIDUE_NODES
        gamma = -1j * sqrt_R(mu, b) * res
        herm_defect = opnorm(gamma - gamma.conj().T)
        if herm_defect > 1e-8 * (1.0 + opnorm(gamma)):
            raise DegenerateResidue(f"non-Hermitian weight at mu={mu}")
        gamma = (gamma + gamma.conj().T) / 2.0
        if np.min(np.linalg.eigvalsh(gamma)) < -1e-8 * (1.0 + opnorm(gamma)):
            raise DegenerateResidue(f"indefinite weight at mu={mu}")
        out.append((mu, gamma))
    return out


def _solve_F(F: MatrixPencil, z):
    Fz = F(z)
    try:
        Finv = np.linalg.inv(Fz)
    except np.linalg.LinAlgError as exc:
        raise SingularF(f"F singular at z={z}") from exc
    if opnorm(Finv) * opnorm(Fz) > 1e14:
        raise SingularF(f"F numerically singular at z={z}")
    return Finv


def weyl_m(F: MatrixPencil, G1: MatrixPencil, b: BandStructure, z, sign=+1):
    """Half-line Weyl matrix (+i sqrt_R I - G1) F^{-1} with the chosen
    branch sign."""
    Finv = _solve_F(F, z)
    return sign * 1j * sqrt_R(z, b) * Finv - G1(z) @ Finv


def weyl_m_alt(F: MatrixPencil, G2: MatrixPencil, b: BandStructure, z, sign=+1):
    """Equivalent left-factored form F^{-1} (+i sqrt_R I - G2)."""
    Finv = _solve_F(F, z)
    return sign * 1j * sqrt_R(z, b) * Finv - Finv @ G2(z)


def weyl_pair(q4: PencilQuadruple):
    """Evaluator pair (M_plus, M_minus) bound to a quadruple."""
    def mp(z):
        return weyl_m(q4.F, q4.G1, q4.bands, z, sign=+1)

    def mm(z):
        return weyl_m(q4.F, q4.G1, q4.bands, z, sign=-1)

    return mp, mm


def full_M(q4: PencilQuadruple, z):
    """2m x 2m Weyl matrix: (i / 2 sqrt_R) [[H, -G2], [-G1, F]]."""
    m = q4.dim
    r = sqrt_R(z, q4.bands)
    out = np.zeros((2 * m, 2 * m), dtype=complex)
    out[:m, :m] = q4.H(z)
    out[:m, m:] = -q4.G2(z)
    out[m:, :m] = -q4.G1(z)
    out[m:, m:] = q4.F(z)
    return (0.5j / r) * out


def green_diag(q4: PencilQuadruple, z):
    """Diagonal Green's matrix (i/2) sqrt_R^{-1} F(z)."""
    return (0.5j / sqrt_R(z, q4.bands)) * q4.F(z)


def green_diag_from_weyl(mp, mm, z):
    """Second route: inverse of the Weyl-matrix difference."""
    D = mm(z) - mp(z)
    try:
        return np.linalg.inv(D)
    except np.linalg.LinAlgError as exc:
        raise SingularDifference(f"M_- - M_+ singular at z={z}") from exc


def xi_function(g_eval, lam, eps_ladder=EPS_LADDER):
    """Boundary value of the normalized log-argument of g.

    Xi(lam) = lim (L - L*) / (2 i pi) with L = log g(lam + i eps),
    extrapolated down the eps ladder; Hermitian by construction.
    """
    vals = []
    for eps in eps_ladder:
        L = scipy.linalg.logm(np.asarray(g_eval(lam + 1j * eps), dtype=complex))
        vals.append((L - L.conj().T) / (2j * np.pi))
    return extrapolate_to_zero(eps_ladder, vals)


def reflectionless_check(mp, mm, lams, eps_ladder=EPS_LADDER):
    """Max over the grid of || lim M_+(lam+i eps) - lim M_-(lam+i eps)^* ||."""
    worst = 0.0
    for lam in lams:
        A = extrapolate_to_zero(eps_ladder, [mp(lam + 1j * e) for e in eps_ladder])
        B = extrapolate_to_zero(eps_ladder, [mm(lam + 1j * e) for e in eps_ladder])
        worst = max(worst, opnorm(A - B.conj().T))
    return worst


def stieltjes_invert(m_eval, lams, eps_ladder=EPS_LADDER):
    """Spectral density (1/pi) Im M(lam + i0) at each grid point."""
    out = []
    for lam in lams:
        vals = []
        for eps in eps_ladder:
            M = np.asarray(m_eval(lam + 1j * eps), dtype=complex)
            vals.append((M - M.conj().T) / (2j * np.pi))
        out.append(extrapolate_to_zero(eps_ladder, vals))
    return out


def scalar_classify(zeros, b: BandStructure, samples=500, seed=0):
    """Classify a scalar zero set against the gap structure.

    One zero per closed gap and nothing else is F-type; one extra zero
    at or below the bottom edge is H-type.  The certificate is the
    minimum sampled imaginary part of the associated ratio on the upper
    half-plane (nonnegative for a genuine Herglotz function).
    """
    zeros = sorted(float(z) for z in zeros)
    gaps = [(a, b_) for a, b_ in b.gaps()]
    remaining = list(zeros)
    per_gap_ok = True
    for a, b_ in gaps:
        inside = [z for z in remaining if a <= z <= b_]
        if len(inside) != 1:
            per_gap_ok = False
            break
        remaining.remove(inside[0])
    if per_gap_ok and not remaining:
        kind = "F-type"
    elif per_gap_ok and len(remaining) == 1 and remaining[0] <= b.edges[0]:
        kind = "H-type"
    else:
        kind = "invalid"

    rng = np.random.default_rng(seed)
    span = b.edges[-1] - b.edges[0] + 1.0
    re = rng.uniform(b.edges[0] - span, b.edges[-1] + span, size=samples)
    im = rng.uniform(1e-3, span, size=samples)
    worst = np.inf
    for zr, zi in zip(re, im):
        z = complex(zr, zi)
        p = np.prod([z - w for w in zeros]) if zeros else 1.0
        worst = min(worst, (1j * p / sqrt_R(z, b)).imag)
    return {"kind": kind, "herglotz_min_im": float(worst)}


def herglotz_rep_integral(poly_coeffs, b: BandStructure, z, kind="F", quad_tol=1e-10):
    """Right-hand side of the spectral integral representation.

    poly_coeffs are ascending scalar coefficients.  F-kind uses the
    plain Cauchy kernel; H-kind (one degree higher, growing like
    sqrt(z)) needs the once-subtracted kernel plus the real part of the
    ratio at z = i.
    """
    p = np.polynomial.Polynomial(list(poly_coeffs))

    def weight(lam):
        # boundary value of the ratio on a band is purely imaginary
        return (p(lam) / sqrt_R(lam, b)).real

    z = complex(z)
    if kind == "F":
        val = integrate_spectrum(lambda lam: weight(lam) / (lam - z), b, tol=quad_tol)
        return complex(val) / np.pi
    if kind == "H":
        const = (1j * p(1j) / sqrt_R(1j, b)).real

        def f(lam):
            return weight(lam) * (1.0 / (lam - z) - lam / (1.0 + lam * lam))

        return const + complex(integrate_spectrum(f, b, tol=quad_tol)) / np.pi
    raise ValueError("kind must be 'F' or 'H'")
