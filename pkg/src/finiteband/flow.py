"""x-dynamics: fundamental systems of the matrix Schrödinger equation,
Weyl solutions, the coefficient-space pencil flow, transport of pencils
through the fundamental system, Riccati residuals, and the Floquet
band-edge oracle.

The pencil flow closes into an autonomous coefficient ODE because Q can
be read back from the subleading coefficient of the monic pencil.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .bands import BandStructure
from .errors import IdentityDrift, StepUnderflow, WindowTooNarrow
from .jets import asymptotic_m_coeffs  # noqa: F401  (re-export)
from .kdv import c_coeffs
from .linalg import opnorm
from .pencils import MatrixPencil, PencilQuadruple, check_quadruple
from .weyl import weyl_m

ODE_RTOL = 1e-11
ODE_ATOL = 1e-11
FLOW_TOL = 1e-8


@dataclass
class FundamentalSystem:
    """Matrix solutions normalized to the identity at x0.

    theta solves -y'' + Q y = z y with theta(x0) = I, theta'(x0) = 0;
    phi with phi(x0) = 0, phi'(x0) = I.
    """

    z: complex
    x0: float
    xs: np.ndarray
    theta: np.ndarray     # (N, m, m)
    phi: np.ndarray
    theta_p: np.ndarray
    phi_p: np.ndarray

    def at(self, i):
        return self.theta[i], self.phi[i], self.theta_p[i], self.phi_p[i]


def _solve_matrix_ode(rhs, y0, x0, x1, xs, rtol, atol):
    span_xs = np.asarray(xs, dtype=float)
    sol = solve_ivp(
        rhs, (x0, x1), y0, method="RK45", t_eval=span_xs,
        rtol=rtol, atol=atol, dense_output=False,
    )
    if not sol.success:
        raise StepUnderflow(sol.message)
    return sol


def integrate_fundamental(Qfun, m, z, x0, x1, xs=None, rtol=ODE_RTOL, atol=ODE_ATOL):
    """Fundamental system of -y'' + Q y = z y over [x0, x1]."""
    z = complex(z)
    if xs is None:
        xs = np.linspace(x0, x1, 9)
    eye = np.eye(m, dtype=complex)

    def rhs(x, y):
        Y = y.reshape(2 * m, 2 * m)
        top = Y[m:]
        bot = (np.asarray(Qfun(x), dtype=complex) - z * eye) @ Y[:m]
        return np.concatenate([top, bot]).ravel()

    Y0 = np.zeros((2 * m, 2 * m), dtype=complex)
    Y0[:m, :m] = eye
    Y0[m:, m:] = eye
    sol = _solve_matrix_ode(rhs, Y0.ravel(), x0, x1, xs, rtol, atol)
    Y = sol.y.T.reshape(len(sol.t), 2 * m, 2 * m)
    return FundamentalSystem(
        z=z, x0=x0, xs=sol.t,
        theta=Y[:, :m, :m], phi=Y[:, :m, m:],
        theta_p=Y[:, m:, :m], phi_p=Y[:, m:, m:],
    )


def weyl_solutions(q4: PencilQuadruple, Qfun, z, x0, xs, rtol=ODE_RTOL, atol=ODE_ATOL):
    """Weyl solutions psi_pm = theta + phi M_pm over the sampled range."""
    m = q4.dim
    fs = integrate_fundamental(Qfun, m, z, x0, max(xs), xs=xs, rtol=rtol, atol=atol)
    Mp = weyl_m(q4.F, q4.G1, q4.bands, z, sign=+1)
    Mm = weyl_m(q4.F, q4.G1, q4.bands, z, sign=-1)
    psi_p = fs.theta + fs.phi @ Mp
    psi_m = fs.theta + fs.phi @ Mm
    psi_p_prime = fs.theta_p + fs.phi_p @ Mp
    psi_m_prime = fs.theta_p + fs.phi_p @ Mm
    return psi_p, psi_m, psi_p_prime, psi_m_prime


def _quadruple_from_state(Fc, G1c, G2c, Hc, b):
    return PencilQuadruple(
        F=MatrixPencil(np.array(Fc)),
        G1=MatrixPencil(np.array(G1c)),
        G2=MatrixPencil(np.array(G2c)),
        H=MatrixPencil(np.array(Hc)),
        bands=b,
    )


def evolve_pencils(q4: PencilQuadruple, xs, rtol=ODE_RTOL, atol=ODE_ATOL,
                   flow_tol=FLOW_TOL, check_z=None):
    """Integrate the coefficient-space pencil flow from xs[0].

    The flow is F' = -(G1 + G2), G1' = zF - QF - H, G2' = zF - FQ - H,
    H' = z(G1 + G2) - G1 Q - Q G2 read coefficient-wise, with Q
    recovered from the subleading coefficient of F.  Returns one
    quadruple and one Q per grid point; the identity ledger is checked
    at the final point when check_z is supplied.
    """
    b = q4.bands
    n = b.n
    m = q4.dim
    xs = np.asarray(xs, dtype=float)
    eye = np.eye(m, dtype=complex)
    if n == 0:
        quads = [q4 for _ in xs]
        E0 = b.edges[0]
        return quads, np.array([E0 * eye for _ in xs])
    c1 = c_coeffs(b)[1]

    # packed state: F_0..F_{n-1}, G1_0..G1_{n-1}, G2_0..G2_{n-1}, H_0..H_n
    sizes = (n, n, n, n + 1)

    def pack(Fc, G1c, G2c, Hc):
        return np.concatenate([
            np.asarray(Fc[:n]).ravel(), np.asarray(G1c).ravel(),
            np.asarray(G2c).ravel(), np.asarray(Hc[: n + 1]).ravel(),
        ])

    def unpack(y):
        blocks = []
        off = 0
        for s in sizes:
            blocks.append(y[off:off + s * m * m].reshape(s, m, m))
            off += s * m * m
        return blocks

    def pad(c, deg):
        out = np.zeros((deg + 1, m, m), dtype=complex)
        out[: len(c)] = c
        return out

    def rhs(x, y):
        Fc, G1c, G2c, Hc = unpack(y)
        Q = 2.0 * (Fc[n - 1] - c1 * eye)
        Ffull = np.concatenate([Fc, eye[None]])        # degrees 0..n
        G1f = pad(G1c, n)                              # zero-padded to n
        G2f = pad(G2c, n)
        Hfull = np.concatenate([Hc, eye[None]])        # degrees 0..n+1
        dF = -(G1c + G2c)
        dG1 = np.zeros_like(G1c)
        dG2 = np.zeros_like(G2c)
        for k in range(n):
            below = Ffull[k - 1] if k >= 1 else np.zeros((m, m), dtype=complex)
            dG1[k] = below - Q @ Ffull[k] - Hfull[k]
            dG2[k] = below - Ffull[k] @ Q - Hfull[k]
        dH = np.zeros_like(Hc)
        for k in range(n + 1):
            below = (G1f[k - 1] + G2f[k - 1]) if k >= 1 else np.zeros((m, m), dtype=complex)
            dH[k] = below - G1f[k] @ Q - Q @ G2f[k]
        return pack(dF, dG1, dG2, dH)

    # degree-padded initial data
    F0 = pad(q4.F.coeffs, n)[: n]
    G10 = pad(q4.G1.coeffs, n - 1)
    G20 = pad(q4.G2.coeffs, n - 1)
    H0 = pad(q4.H.coeffs, n + 1)[: n + 1]
    y0 = pack(np.concatenate([F0, eye[None]]), G10, G20,
              np.concatenate([H0, eye[None]]))
    sol = _solve_matrix_ode(rhs, y0, xs[0], xs[-1], xs, rtol, atol)

    quads = []
    Qs = []
    for col in sol.y.T:
        Fc, G1c, G2c, Hc = unpack(col)
        quads.append(_quadruple_from_state(
            np.concatenate([Fc, eye[None]]), G1c, G2c,
            np.concatenate([Hc, eye[None]]), b,
        ))
        Qs.append(2.0 * (Fc[n - 1] - c1 * eye))
    if check_z is not None:
        report = check_quadruple(quads[-1], check_z, ledger_tol=10.0 * flow_tol)
        if report["max_residual"] > 10.0 * flow_tol:
            raise IdentityDrift(
                f"ledger residual {report['max_residual']:.3e} after the flow"
            )
    return quads, np.array(Qs)


def _fit_monic_values(zs, vals, degree):
    """Coefficients 0..degree-1 of a monic matrix polynomial from values."""
    zs = np.asarray(zs, dtype=complex)
    V = np.vander(zs, N=degree, increasing=True)     # (K, degree)
    rhs = np.array([v - (z ** degree) * np.eye(v.shape[0])
                    for z, v in zip(zs, vals)])
    K, m, _ = rhs.shape
    sol, *_ = np.linalg.lstsq(V, rhs.reshape(K, m * m), rcond=None)
    return sol.reshape(degree, m, m)


def _fit_plain_values(zs, vals, degree):
    zs = np.asarray(zs, dtype=complex)
    V = np.vander(zs, N=degree + 1, increasing=True)
    arr = np.asarray(vals)
    K, m, _ = arr.shape
    sol, *_ = np.linalg.lstsq(V, arr.reshape(K, m * m), rcond=None)
    return sol.reshape(degree + 1, m, m)


def transport_pencils(q4: PencilQuadruple, Qfun, xs, z_nodes=None,
                      rtol=ODE_RTOL, atol=ODE_ATOL):
    """Second, ODE-free-in-coefficients route to the pencils at x.

    Conjugating the quadruple at x0 by the fundamental system gives the
    pencil values at each x and z; coefficients follow from a
    least-squares Vandermonde fit at the z nodes.
    """
    b = q4.bands
    n = b.n
    m = q4.dim
    xs = np.asarray(xs, dtype=float)
    if z_nodes is None:
        span = 1.0 + max(abs(e) for e in b.edges)
        z_nodes = [span * (0.3 * k - 0.5 + 1.2j * (1 + 0.3 * k)) for k in range(n + 3)]
    F0 = [q4.F(z) for z in z_nodes]
    G10 = [q4.G1(z) for z in z_nodes]
    G20 = [q4.G2(z) for z in z_nodes]
    H0 = [q4.H(z) for z in z_nodes]

    per_z = []
    for z in z_nodes:
        fs = integrate_fundamental(Qfun, m, z, xs[0], xs[-1], xs=xs,
                                   rtol=rtol, atol=atol)
        fsc = integrate_fundamental(Qfun, m, np.conj(z), xs[0], xs[-1], xs=xs,
                                    rtol=rtol, atol=atol)
        per_z.append((fs, fsc))

    quads = []
    for i in range(len(xs)):
        Fv, G1v, G2v, Hv = [], [], [], []
        for (fs, fsc), F_, G1_, G2_, H_ in zip(per_z, F0, G10, G20, H0):
            th, ph, thp, php = fs.at(i)
            thc, phc, thpc, phpc = (a.conj().T for a in fsc.at(i))
            Fv.append(th @ F_ @ thc + ph @ H_ @ phc
                      - ph @ G1_ @ thc - th @ G2_ @ phc)
            G1v.append(-thp @ F_ @ thc - php @ H_ @ phc
                       + php @ G1_ @ thc + thp @ G2_ @ phc)
            G2v.append(-th @ F_ @ thpc - ph @ H_ @ phpc
                       + ph @ G1_ @ thpc + th @ G2_ @ phpc)
            Hv.append(thp @ F_ @ thpc + php @ H_ @ phpc
                      - php @ G1_ @ thpc - thp @ G2_ @ phpc)
        Fc = np.concatenate([_fit_monic_values(z_nodes, Fv, n),
                             np.eye(m, dtype=complex)[None]])
        Hc = np.concatenate([_fit_monic_values(z_nodes, Hv, n + 1),
                             np.eye(m, dtype=complex)[None]])
        gdeg = max(n - 1, 0)
        quads.append(_quadruple_from_state(
            Fc, _fit_plain_values(z_nodes, G1v, gdeg),
            _fit_plain_values(z_nodes, G2v, gdeg), Hc, b,
        ))
    return quads


def riccati_residual(m_of_x, Qfun, z, xs, h):
    """Max norm of dM/dx + M^2 - Q + zI; dM/dx by a fourth-order
    centered five-point stencil at spacing h."""
    z = complex(z)
    worst = 0.0
    for x in xs:
        M = np.asarray(m_of_x(x), dtype=complex)
        dM = (
            -np.asarray(m_of_x(x + 2 * h)) + 8.0 * np.asarray(m_of_x(x + h))
            - 8.0 * np.asarray(m_of_x(x - h)) + np.asarray(m_of_x(x - 2 * h))
        ) / (12.0 * h)
        Q = np.asarray(Qfun(x), dtype=complex)
        res = dM + M @ M - Q + z * np.eye(M.shape[0])
        worst = max(worst, opnorm(res))
    return worst


def weyl_m_ode(Qfun, m, z, x0, L, sign=+1, rtol=ODE_RTOL, atol=ODE_ATOL):
    """Half-line Weyl matrix by direct Riccati integration.

    Starts from the WKB value sign*i*sqrt(zI - Q) at x0 + sign*L and
    integrates M' = Q - zI - M^2 back to x0.  The decaying solution is
    attracting in this direction, so the result is independent of L
    once the potential has settled near its tail value.  This route
    makes no structural assumption about Q and serves as the
    independent oracle for non-reflectionless potentials.
    """
    import scipy.linalg

    z = complex(z)
    xinit = x0 + sign * L
    eye = np.eye(m, dtype=complex)
    A = scipy.linalg.sqrtm(z * eye - np.asarray(Qfun(xinit), dtype=complex))
    # principal square root has nonnegative real part; flip branches so
    # that sign * i * A generates decay toward sign * infinity
    M0 = sign * 1j * A

    def rhs(x, y):
        M = y.reshape(m, m)
        return (np.asarray(Qfun(x), dtype=complex) - z * eye - M @ M).ravel()

    sol = solve_ivp(rhs, (xinit, x0), M0.astype(complex).ravel(),
                    method="RK45", rtol=rtol, atol=atol)
    if not sol.success:
        raise StepUnderflow(sol.message)
    return sol.y[:, -1].reshape(m, m)


def asymptotic_partial_sum(qjet, z, N, sign=+1):
    """sign*i*sqrt(z)*I + sum_{k<=N} M_k z^{-k/2} (principal root)."""
    m = qjet.shape[1]
    Ms = asymptotic_m_coeffs(qjet, N, sign=sign)
    rt = np.sqrt(complex(z))
    out = sign * 1j * rt * np.eye(m, dtype=complex)
    for k, Mk in enumerate(Ms, start=1):
        out = out + Mk[0] * rt ** (-k)
    return out


def floquet_discriminants(qfun, period, lams, x0=0.0, rtol=1e-10, atol=1e-10):
    """Traces of the one-period monodromy at many energies at once.

    One vectorized real-valued integration carries every lam; the step
    controller works on the stacked state, so the batch costs far less
    than per-energy integrations.
    """
    lams = np.asarray(lams, dtype=float)
    L = len(lams)

    def rhs(x, y):
        Y = y.reshape(2, 2, L)
        q = float(qfun(x))
        out = np.empty_like(Y)
        out[:, 0] = Y[:, 1]
        out[:, 1] = (q - lams) * Y[:, 0]
        return out.ravel()

    Y0 = np.zeros((2, 2, L))
    Y0[0, 0] = 1.0   # theta(x0) = 1
    Y0[1, 1] = 1.0   # phi'(x0) = 1
    sol = solve_ivp(rhs, (x0, x0 + period), Y0.ravel(), method="RK45",
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise StepUnderflow(sol.message)
    Y = sol.y[:, -1].reshape(2, 2, L)
    return Y[0, 0] + Y[1, 1]


def floquet_discriminant(qfun, period, lam, x0=0.0, rtol=1e-10, atol=1e-10):
    """Trace of the one-period monodromy of the scalar Hill equation."""
    return float(floquet_discriminants(qfun, period, [lam], x0=x0,
                                       rtol=rtol, atol=atol)[0])


def floquet_band_edges(qfun, period, window, npoints=801, root_tol=1e-9,
                       scan_rtol=1e-10):
    """Band edges in the window: solutions of |discriminant| = 2.

    A uniform scan brackets sign changes of |D| - 2, each refined by
    bisection.  Tangential touch points (closed gaps) show up as local
    minima of ||D| - 2| and are refined by golden-section search.
    """
    lo, hi = window
    lams = np.linspace(lo, hi, npoints)
    h = np.abs(floquet_discriminants(qfun, period, lams,
                                     rtol=scan_rtol, atol=scan_rtol)) - 2.0
    edges = []
    # transversal crossings: vectorized bisection over all brackets
    brackets = [(lams[i], lams[i + 1], h[i])
                for i in range(npoints - 1) if h[i] * h[i + 1] < 0.0]
    edges.extend(float(lams[i]) for i in range(npoints) if h[i] == 0.0)
    if brackets:
        a = np.array([br[0] for br in brackets])
        b_ = np.array([br[1] for br in brackets])
        fa = np.array([br[2] for br in brackets])
        while np.max(b_ - a) > root_tol:
            mid = 0.5 * (a + b_)
            fm = np.abs(floquet_discriminants(qfun, period, mid,
                                              rtol=scan_rtol, atol=scan_rtol)) - 2.0
            left = fa * fm <= 0.0
            b_ = np.where(left, mid, b_)
            a = np.where(left, a, mid)
            fa = np.where(left, fa, fm)
        edges.extend((0.5 * (a + b_)).tolist())
    # tangential touches: interior minima of |h| that dip to zero
    minima = [i for i in range(1, npoints - 1)
              if h[i] > 0.0 and h[i] < h[i - 1] and h[i] < h[i + 1]]
    phi = 0.5 * (np.sqrt(5.0) - 1.0)
    for i in minima:
        a, b_ = lams[i - 1], lams[i + 1]
        x1 = b_ - phi * (b_ - a)
        x2 = a + phi * (b_ - a)
        f1, f2 = np.abs(np.abs(floquet_discriminants(
            qfun, period, [x1, x2], rtol=scan_rtol, atol=scan_rtol)) - 2.0)
        while b_ - a > root_tol:
            if f1 < f2:
                b_, x2, f2 = x2, x1, f1
                x1 = b_ - phi * (b_ - a)
                f1 = abs(abs(floquet_discriminant(qfun, period, x1,
                                                  rtol=scan_rtol,
                                                  atol=scan_rtol)) - 2.0)
            else:
                a, x1, f1 = x1, x2, f2
                x2 = a + phi * (b_ - a)
                f2 = abs(abs(floquet_discriminant(qfun, period, x2,
                                                  rtol=scan_rtol,
                                                  atol=scan_rtol)) - 2.0)
        if min(f1, f2) < np.sqrt(root_tol):
            edges.append(0.5 * (a + b_))
    if not edges:
        raise WindowTooNarrow(f"no band edges in [{lo}, {hi}]")
    return sorted(float(e) for e in edges)
