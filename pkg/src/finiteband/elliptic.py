"""Weierstrass elliptic function engine for the one-gap construction.

A one-gap band structure maps to a real elliptic curve whose roots are
the shifted band edges; the curve carries one real and one purely
imaginary half-period.  The elliptic function itself is evaluated by
lattice reduction, a half-period shift when the argument sits far from
the origin, and the Laurent series; higher derivatives come from the
differential equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ellipk

from .bands import BandStructure
from .errors import DegenerateGap, PoleProximity

SERIES_TERMS = 64
POLE_MARGIN_FACTOR = 1e-6


@dataclass
class EllipticCurve:
    """Real curve y^2 = 4t^3 - g2 t - g3 with roots e1 > e2 > e3."""

    e1: float
    e2: float
    e3: float
    g2: float
    g3: float
    omega1: float     # real half-period > 0
    omega3: complex   # purely imaginary, -i*omega3 > 0
    _series: np.ndarray = field(default=None, repr=False, compare=False)

    def laurent_coeffs(self, terms=SERIES_TERMS):
        """Coefficients c_k of p(u) = u^-2 + sum_{k>=2} c_k u^{2k-2}."""
        if self._series is None or len(self._series) < terms:
            c = np.zeros(terms)
            if terms > 2:
                c[2] = self.g2 / 20.0
            if terms > 3:
                c[3] = self.g3 / 28.0
            for k in range(4, terms):
                acc = sum(c[m] * c[k - m] for m in range(2, k - 1))
                c[k] = 3.0 * acc / ((2 * k + 1) * (k - 3))
            self._series = c
        return self._series


def curve_from_bands(b: BandStructure, gap_tol=1e-12) -> EllipticCurve:
    """One-gap band edges -> elliptic curve.

    The shift s = (E0+E1+E2)/3 centers the roots (e1, e2, e3) =
    (s-E0, s-E1, s-E2) so they sum to zero; half-periods follow from
    complete elliptic integrals.
    """
    if b.n != 1:
        raise ValueError("curve_from_bands needs a one-gap band structure")
    E0, E1, E2 = b.edges
    if E2 - E1 < gap_tol * (1.0 + abs(E1) + abs(E2)):
        raise DegenerateGap(f"E1={E1} and E2={E2} coincide")
    s = (E0 + E1 + E2) / 3.0
    e1, e2, e3 = s - E0, s - E1, s - E2
    g2 = -4.0 * (e1 * e2 + e2 * e3 + e3 * e1)
    g3 = 4.0 * e1 * e2 * e3
    k2 = (e2 - e3) / (e1 - e3)
    root = np.sqrt(e1 - e3)
    omega1 = float(ellipk(k2) / root)
    omega3 = 1j * float(ellipk(1.0 - k2) / root)
    return EllipticCurve(e1, e2, e3, g2, g3, omega1, omega3)


def _reduce_to_cell(u, c: EllipticCurve):
    """Reduce u modulo the period lattice to the cell centered at 0.

    The lattice is rectangular (2*omega1 real, 2*omega3 imaginary)."""
    w1 = 2.0 * c.omega1
    w3 = 2.0 * c.omega3.imag
    a = u.real / w1
    bcoef = u.imag / w3
    a -= np.round(a)
    bcoef -= np.round(bcoef)
    return complex(a * w1, bcoef * w3)


def _wp_series(u, c: EllipticCurve):
    """Laurent series for p and p' near the origin."""
    cs = c.laurent_coeffs()
    u2 = u * u
    p = 1.0 / u2
    dp = -2.0 / (u2 * u)
    upow = 1.0
    for k in range(2, len(cs)):
        upow = upow * u2 if k > 2 else u2
        # upow = u^(2k-2)
        p = p + cs[k] * upow
        dp = dp + cs[k] * (2 * k - 2) * upow / u
    return p, dp


def _wp_core(u, c: EllipticCurve):
    """p(u) and p'(u) after lattice reduction and half-period shifts."""
    u = _reduce_to_cell(complex(u), c)
    margin = POLE_MARGIN_FACTOR * abs(2.0 * c.omega1)
    halves = {
        "w1": (c.omega1, c.e1, c.e2, c.e3),
        "w3": (c.omega3, c.e3, c.e1, c.e2),
        "w2": (c.omega1 + c.omega3, c.e2, c.e1, c.e3),
    }
    # shift toward the origin if a half-period translate is closer
    best = None
    for key, (w, ej, ek, el) in halves.items():
        for sgn in (+1.0, -1.0):
            v = u - sgn * w
            if best is None or abs(v) < best[0]:
                best = (abs(v), v, ej, ek, el)
    if best[0] < abs(u):
        _, v, ej, ek, el = best
        if abs(v) < 1e-150:
            # exactly at a half-period: p = e_j, p' = 0
            return complex(ej), complex(0.0)
        p0, dp0 = _wp_series(v, c)
        fac = (ej - ek) * (ej - el)
        denom = p0 - ej
        p = ej + fac / denom
        dp = -fac * dp0 / (denom * denom)
        return p, dp
    if abs(u) < margin:
        raise PoleProximity(f"argument within {margin:.3e} of the lattice")
    return _wp_series(u, c)


def wp(u, c: EllipticCurve, order=0):
    """Value of the elliptic function or its derivative (order 0..3).

    Orders 2 and 3 use the differential equation:
    p'' = 6 p^2 - g2/2 and p''' = 12 p p'.
    """
    p, dp = _wp_core(u, c)
    if order == 0:
        return p
    if order == 1:
        return dp
    if order == 2:
        return 6.0 * p * p - c.g2 / 2.0
    if order == 3:
        return 12.0 * p * dp
    raise ValueError("order must be 0, 1, 2, or 3")
