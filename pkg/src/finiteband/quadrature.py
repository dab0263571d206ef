"""Quadrature over finite-band spectra.

Integrands on a band behave like (inverse square root of the distance
to each edge) times a smooth factor, so Gauss-Chebyshev nodes absorb
the endpoint singularities exactly.  The half-line band is mapped to
[0, 1) by lam = E + t/(1-t), which turns the decay at infinity into
another inverse-square-root endpoint.
"""

from __future__ import annotations

import numpy as np

from .errors import QuadratureNotConverged

DEFAULT_QUAD_TOL = 1e-9
MAX_NODES = 1 << 17


def chebyshev_rule(f, a, b, nodes):
    """Integrate f over [a, b] assuming f ~ smooth / sqrt((x-a)(b-x)).

    Gauss-Chebyshev: int f = int [f * w] / w with weight
    w(x) = 1/sqrt((x-a)(b-x)); the rule is exact for smooth f*w.
    f may return scalars or arrays.
    """
    mid = 0.5 * (a + b)
    rad = 0.5 * (b - a)
    js = np.arange(1, nodes + 1)
    theta = (2 * js - 1) * np.pi / (2 * nodes)
    xs = mid + rad * np.cos(theta)
    total = None
    for x in xs:
        val = np.asarray(f(x)) * np.sqrt((x - a) * (b - x))
        total = val if total is None else total + val
    return (np.pi / nodes) * total


def adaptive_chebyshev(f, a, b, tol=DEFAULT_QUAD_TOL, start=32):
    nodes = start
    prev = chebyshev_rule(f, a, b, nodes)
    while nodes <= MAX_NODES:
        nodes *= 2
        cur = chebyshev_rule(f, a, b, nodes)
        err = np.max(np.abs(cur - prev))
        if err < tol * (1.0 + np.max(np.abs(cur))):
            return cur
        prev = cur
    raise QuadratureNotConverged(f"band [{a}, {b}]: no convergence at {MAX_NODES} nodes")


def integrate_band(f, a, b, tol=DEFAULT_QUAD_TOL):
    """Integral of f over one band; b = inf maps through t/(1-t)."""
    if np.isinf(b):
        def g(t):
            lam = a + t / (1.0 - t)
            return np.asarray(f(lam)) / (1.0 - t) ** 2
        return adaptive_chebyshev(g, 0.0, 1.0, tol=tol)
    return adaptive_chebyshev(f, a, b, tol=tol)


def integrate_spectrum(f, band_structure, tol=DEFAULT_QUAD_TOL):
    """Sum of band integrals over the whole spectrum."""
    total = None
    for a, b in band_structure.bands():
        val = integrate_band(f, a, b, tol=tol)
        total = val if total is None else total + val
    return total
