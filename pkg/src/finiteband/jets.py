"""Truncated derivative stacks (jets) of matrix-valued functions.

A jet is an array of shape (p+1, m, m) holding a function value and its
first p derivatives at one point.  Products follow the Leibniz rule and
lose no order; differentiation drops the top slot.  This is enough to
drive differential-polynomial recursions from a finite derivative
budget without symbolic algebra.
"""

from __future__ import annotations

from math import comb

import numpy as np


def as_jet(stack):
    j = np.asarray(stack, dtype=complex)
    if j.ndim != 3 or j.shape[1] != j.shape[2]:
        raise ValueError("jet must have shape (order+1, m, m)")
    return j


def jet_order(j):
    return j.shape[0] - 1


def jet_const(A, order):
    """Jet of a constant matrix: derivatives vanish."""
    A = np.asarray(A, dtype=complex)
    out = np.zeros((order + 1,) + A.shape, dtype=complex)
    out[0] = A
    return out


def jet_scale(c, j):
    return complex(c) * as_jet(j)


def jet_add(a, b):
    a, b = as_jet(a), as_jet(b)
    p = min(jet_order(a), jet_order(b))
    return a[: p + 1] + b[: p + 1]


def jet_mul(a, b):
    """Leibniz product; result order = min of the factor orders."""
    a, b = as_jet(a), as_jet(b)
    p = min(jet_order(a), jet_order(b))
    out = np.zeros((p + 1,) + a.shape[1:], dtype=complex)
    for k in range(p + 1):
        for j in range(k + 1):
            out[k] += comb(k, j) * (a[j] @ b[k - j])
    return out


def jet_diff(a):
    """Derivative jet: one order fewer."""
    a = as_jet(a)
    if jet_order(a) < 1:
        raise ValueError("cannot differentiate an order-0 jet")
    return a[1:]


def asymptotic_m_coeffs(qjet, N, sign=+1):
    """Expansion coefficients of the half-line Weyl matrix at large z.

    M(z) = sign*i*sqrt(z)*I + sum_{k>=1} M_k z^{-k/2} with
    M_1 = -sign*(i/2) Q and the recursion
    M_{k+1} = sign*(i/2) (M_k' + sum_{l=1}^{k-1} M_l M_{k-l}).
    Returns jets [M_1 ... M_N]; each step spends one derivative, so the
    input jet must have order >= N - 1.
    """
    qjet = as_jet(qjet)
    if jet_order(qjet) < N - 1:
        raise ValueError(f"need a jet of order >= {N - 1}")
    Ms = [-sign * 0.5j * qjet]
    for k in range(1, N):
        term = jet_diff(Ms[k - 1])
        for l in range(1, k):
            term = jet_add(term, jet_mul(Ms[l - 1], Ms[k - 1 - l]))
        Ms.append(sign * 0.5j * term)
    return Ms
