"""Stationary KdV hierarchy residuals.

The diagonal Green's matrix has a large-z expansion whose coefficients
are differential polynomials in Q; the band edges pin the free
integration constants through a finite multinomial sum.  Both pieces
combine into the stationary hierarchy equation a finite-band potential
must satisfy.
"""

from __future__ import annotations

from itertools import product
from math import factorial

import numpy as np

from .bands import BandStructure
from .errors import InsufficientDerivatives
from .jets import (
    as_jet,
    asymptotic_m_coeffs,
    jet_add,
    jet_const,
    jet_mul,
    jet_order,
    jet_scale,
)
from .linalg import opnorm


def _tfactor(j):
    # (2j)! / (2^{2j} (j!)^2 (2j-1)); j=0 gives -1
    return factorial(2 * j) / (4 ** j * factorial(j) ** 2 * (2 * j - 1))


def c_coeffs(b: BandStructure):
    """Band-edge constants c_0..c_n of the hierarchy (c_0 = 1)."""
    edges = b.edges
    out = []
    for k in range(b.n + 1):
        acc = 0.0
        for js in product(range(k + 1), repeat=len(edges)):
            if sum(js) != k:
                continue
            term = 1.0
            for e, j in zip(edges, js):
                term *= _tfactor(j) * e ** j
            acc += term
        out.append(-acc)
    return out


def rhat_eval(qjet, K):
    """Green's-matrix expansion coefficients R_hat_0..R_hat_K as jets.

    Derived by inverting the series for the difference of the two
    half-line Weyl expansions; R_hat_1 = Q/2 and
    R_hat_2 = -Q''/8 + 3Q^2/8 fall out of the recursion.
    """
    qjet = as_jet(qjet)
    m = qjet.shape[1]
    if K == 0:
        return [jet_const(np.eye(m), jet_order(qjet))]
    N = 2 * K - 1
    if jet_order(qjet) < N - 1:
        raise InsufficientDerivatives(
            f"K={K} needs a jet of order >= {N - 1}, got {jet_order(qjet)}"
        )
    Mp = asymptotic_m_coeffs(qjet, N, sign=+1)
    Mm = asymptotic_m_coeffs(qjet, N, sign=-1)
    # b_{k+1} = (M_{+,k} - M_{-,k}) / (2i); the series I + sum b_j w^j
    # (w = z^{-1/2}) is what the Green's matrix inverts
    bcoef = {k + 1: jet_scale(1.0 / 2j, Mp[k - 1] + (-1.0) * Mm[k - 1])
             for k in range(1, N + 1)}
    order0 = jet_order(qjet)
    C = [jet_const(np.eye(m), order0)]
    for j in range(1, 2 * K + 1):
        acc = None
        for i in range(2, j + 1):
            if i not in bcoef:
                continue
            term = jet_mul(bcoef[i], C[j - i])
            acc = term if acc is None else jet_add(acc, term)
        C.append(jet_scale(-1.0, acc) if acc is not None
                 else jet_const(np.zeros((m, m)), order0 - j))
    return [C[2 * k] for k in range(K + 1)]


def skdv_residual(jets, b: BandStructure, cs=None):
    """Max norm of the stationary hierarchy combination
    -2 sum_l c_{n-l} R_hat'_{l+1} over the supplied grid jets.

    `jets` is an iterable of order-(2n+1) jets (one per grid point);
    cs overrides the band-pinned constants when supplied.
    """
    n = b.n
    if cs is None:
        cs = c_coeffs(b)
    worst = 0.0
    for qjet in jets:
        rh = rhat_eval(qjet, n + 1)
        acc = None
        for l in range(n + 1):
            term = -2.0 * cs[n - l] * rh[l + 1][1]  # first-derivative slot
            acc = term if acc is None else acc + term
        worst = max(worst, opnorm(acc))
    return worst
