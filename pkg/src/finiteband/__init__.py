"""Reflectionless finite-band matrix Schrödinger potentials.

Construction of the constant (gapless) and one-gap closed-form
families, the polynomial pencil apparatus behind their Weyl matrices,
and numerical verification of the algebraic and analytic identities
those objects satisfy.
"""

from .bands import BandStructure, eval_R, sqrt_R
from .elliptic import EllipticCurve, curve_from_bands, wp
from .errors import FinitebandError
from .linalg import SpectralDecomposition, commutator_norm, herm_eig, mat_func
from .pencils import (
    MatrixPencil,
    PencilQuadruple,
    build_G_from_F,
    build_H_from_F,
    check_quadruple,
    classify,
    pencil_eval,
)
from .potentials import (
    HochstadtPotential,
    HochstadtSpec,
    PotentialProfile,
    borg_pencils,
    borg_potential,
    closed_form_pencils_n1,
    constraint_residuals,
    divisor_from_profile,
    divisor_from_Q1,
    hochstadt_matrix,
    hochstadt_scalar,
    random_unitary,
)
from .weyl import (
    full_M,
    gamma_extract,
    green_diag,
    green_diag_from_weyl,
    herglotz_rep_integral,
    reflectionless_check,
    scalar_classify,
    stieltjes_invert,
    weyl_m,
    weyl_m_alt,
    weyl_pair,
    xi_function,
)
from .flow import (
    asymptotic_m_coeffs,
    asymptotic_partial_sum,
    evolve_pencils,
    floquet_band_edges,
    floquet_discriminant,
    integrate_fundamental,
    riccati_residual,
    transport_pencils,
    weyl_m_ode,
    weyl_solutions,
)
from .kdv import c_coeffs, rhat_eval, skdv_residual

__version__ = "0.1.0"
