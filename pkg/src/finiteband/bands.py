"""Finite-band spectra and the branch-consistent square root of the
band polynomial.

The spectrum is a union of n compact bands plus one half-line,
determined by 2n+1 strictly increasing edges.  The square root of the
edge polynomial is taken with the upper-half-plane limit convention, so
its boundary values on the real axis carry a definite sign pattern on
each band and gap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BandStructure:
    """Edges E0 < E1 < ... < E_{2n} of a finite-band spectrum."""

    edges: tuple

    def __post_init__(self):
        edges = tuple(float(e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        if len(edges) % 2 != 1:
            raise ValueError("need an odd number of edges (2n+1)")
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise ValueError("edges must be strictly increasing")

    @property
    def n(self):
        return (len(self.edges) - 1) // 2

    def bands(self):
        """Closed spectral bands; the last one is [E_{2n}, inf)."""
        e = self.edges
        out = [(e[2 * j], e[2 * j + 1]) for j in range(self.n)]
        out.append((e[2 * self.n], np.inf))
        return out

    def gaps(self):
        """Open spectral gaps (E_{2j-1}, E_{2j}), j = 1..n."""
        e = self.edges
        return [(e[2 * j - 1], e[2 * j]) for j in range(1, self.n + 1)]

    def in_spectrum(self, lam, margin=0.0):
        for a, b in self.bands():
            if a - margin <= lam <= b + margin:
                return True
        return False

    def gap_index(self, lam, margin=0.0):
        """Index (1-based) of the closed gap containing lam, or None."""
        for j, (a, b) in enumerate(self.gaps(), start=1):
            if a - margin <= lam <= b + margin:
                return j
        return None


def eval_R(z, b: BandStructure):
    """Product of (z - E_l) over all edges."""
    out = complex(1.0)
    for e in b.edges:
        out *= complex(z) - e
    return out


def sqrt_R(z, b: BandStructure, side=+1):
    """Branch-consistent square root of eval_R on the cut plane.

    For Im z > 0 this is exp(1/2 sum log(z - E_l)) with principal
    logarithms; the lower half-plane follows from the conjugation
    symmetry conj(sqrt_R(conj z)) = -sqrt_R(z).  Real z are taken as
    boundary limits from the side given by `side` (+1: upper, -1:
    lower), which reproduces the band/gap sign table.
    """
    z = complex(z)
    if z.imag < 0.0:
        return -np.conj(sqrt_R(np.conj(z), b, side=+1))
    if z.imag == 0.0 and side < 0:
        return -np.conj(sqrt_R(z, b, side=+1))
    # principal logs; force +0 imaginary part so negative real factors
    # get argument +pi (the C+ limit)
    acc = complex(0.0)
    for e in b.edges:
        w = z - e
        if w == 0.0:
            return complex(0.0)
        acc += np.log(complex(w.real, w.imag + 0.0))
    return np.exp(0.5 * acc)
