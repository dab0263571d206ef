"""Command-line front door.

Three subcommands share one JSON config:
  construct  write the potential profile and the pencil quadruple
  verify     run the identity ledger and emit a pass/fail report
  sample     stream Green's-matrix, density, log-argument, and
             discriminant tables

Outputs are deterministic for a fixed config and seed; files are
written atomically (temp file + rename).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time

import numpy as np

from .bands import BandStructure
from .errors import (
    ConfigError,
    ExtrapolationDiverged,
    FinitebandError,
    IdentityDrift,
    NoConvergence,
    ParseError,
    QuadratureNotConverged,
    StepUnderflow,
)
from .flow import floquet_discriminant, floquet_band_edges, riccati_residual
from .jets import jet_const
from .kdv import c_coeffs, skdv_residual
from .pencils import check_quadruple
from .potentials import (
    HochstadtPotential,
    HochstadtSpec,
    borg_pencils,
    closed_form_pencils_n1,
    constraint_residuals,
    random_unitary,
)
from .weyl import (
    green_diag,
    reflectionless_check,
    stieltjes_invert,
    weyl_pair,
    xi_function,
)

SCHEMA = "finiteband/1"

DEFAULT_TOLS = {
    "ledger": 1e-10,
    "riccati": 1e-7,
    "skdv": 1e-7,
    "constraints": 1e-9,
    "reflectionless": 1e-6,
    "xi": 1e-4,
    "floquet": 1e-6,
    "green": 1e-12,
}

_TOP_FIELDS = {"schema", "bands", "m", "spec", "xgrid", "zgrid",
               "tolerances", "seed", "perturb"}
_SPEC_FIELDS = {"alphas", "U"}
_XGRID_FIELDS = {"points", "xmin", "xmax", "periods"}
_ZGRID_FIELDS = {"points", "window"}


class RunConfig:
    """Validated run configuration."""

    def __init__(self, raw, tol_overrides=None, seed_override=None):
        if not isinstance(raw, dict):
            raise ConfigError("$", "config must be a JSON object")
        unknown = set(raw) - _TOP_FIELDS
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown field")
        if raw.get("schema") != SCHEMA:
            raise ConfigError("schema", f"expected {SCHEMA!r}")
        try:
            self.bands = BandStructure(tuple(raw["bands"]))
        except KeyError:
            raise ConfigError("bands", "required") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError("bands", str(exc)) from None
        self.m = raw.get("m")
        if not isinstance(self.m, int) or self.m < 1:
            raise ConfigError("m", "positive integer required")
        self.seed = seed_override if seed_override is not None else raw.get("seed", 0)
        if not isinstance(self.seed, int):
            raise ConfigError("seed", "integer required")
        self.perturb = float(raw.get("perturb", 0.0))

        spec = raw.get("spec")
        if self.bands.n == 1:
            if not isinstance(spec, dict):
                raise ConfigError("spec", "required for a one-gap run")
            unknown = set(spec) - _SPEC_FIELDS
            if unknown:
                raise ConfigError(f"spec.{sorted(unknown)[0]}", "unknown field")
            if "alphas" not in spec:
                raise ConfigError("spec.alphas", "required")
            alphas = spec["alphas"]
            if len(alphas) != self.m:
                raise ConfigError("spec.alphas", f"need exactly m={self.m} entries")
            U = spec.get("U", f"random:{self.seed}")
            if isinstance(U, str):
                if not U.startswith("random:"):
                    raise ConfigError("spec.U", "matrix or 'random:<seed>'")
                U = random_unitary(self.m, int(U.split(":", 1)[1]))
            else:
                U = np.array([[complex(v[0], v[1]) for v in row] for row in U])
            try:
                self.spec = HochstadtSpec(self.bands, alphas, U)
            except ValueError as exc:
                raise ConfigError("spec", str(exc)) from None
        else:
            if spec is not None:
                raise ConfigError("spec", "only valid for one-gap runs")
            self.spec = None

        xg = raw.get("xgrid", {})
        if not isinstance(xg, dict) or set(xg) - _XGRID_FIELDS:
            raise ConfigError("xgrid", "unknown field")
        self.x_points = int(xg.get("points", 129))
        self.x_min = xg.get("xmin")
        self.x_max = xg.get("xmax")
        self.x_periods = float(xg.get("periods", 1.0))

        zg = raw.get("zgrid", {})
        if not isinstance(zg, dict) or set(zg) - _ZGRID_FIELDS:
            raise ConfigError("zgrid", "unknown field")
        self.z_points = int(zg.get("points", 64))
        self.z_window = zg.get("window")

        self.tols = dict(DEFAULT_TOLS)
        tols = raw.get("tolerances", {})
        if not isinstance(tols, dict):
            raise ConfigError("tolerances", "object required")
        for key, val in {**tols, **(tol_overrides or {})}.items():
            if key not in DEFAULT_TOLS:
                raise ConfigError(f"tolerances.{key}", "unknown tolerance")
            self.tols[key] = float(val)

    # --- derived objects -------------------------------------------------

    def potential(self):
        """(Qfun(x, order), period-or-None) honoring the perturbation knob."""
        if self.bands.n == 0:
            E0 = self.bands.edges[0]
            eye = np.eye(self.m, dtype=complex)

            def qfun(x, order=0):
                base = E0 * eye if order == 0 else 0.0 * eye
                return base + self._bump(x, order)
            return qfun, None
        pot = HochstadtPotential(self.spec)

        def qfun(x, order=0):
            return pot(x, order=order) + self._bump(x, order)
        return qfun, pot.period

    def _bump(self, x, order):
        if self.perturb == 0.0:
            return 0.0
        eye = np.eye(self.m, dtype=complex)
        cycle = [np.sin, np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t)]
        return self.perturb * cycle[order % 4](x) * eye

    def xgrid(self, period):
        if self.x_min is not None or self.x_max is not None:
            lo = float(self.x_min if self.x_min is not None else -5.0)
            hi = float(self.x_max if self.x_max is not None else 5.0)
        elif period is not None:
            lo, hi = 0.0, self.x_periods * period
        else:
            lo, hi = -5.0, 5.0
        return np.linspace(lo, hi, self.x_points)

    def quadruple_at(self, qfun, x0=0.0):
        if self.bands.n == 0:
            return borg_pencils(self.bands.edges[0], self.m)
        return closed_form_pencils_n1(
            qfun(x0, 0), qfun(x0, 1), qfun(x0, 2), self.bands
        )


# --- file helpers --------------------------------------------------------

def _fmt(v):
    return format(float(v), ".17g")


def atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    atomic_write(path, "\n".join(lines) + "\n")


def _matrix_columns(prefix, m):
    cols = []
    for i in range(m):
        for j in range(m):
            cols.append(f"{prefix}{i}{j}_re")
            cols.append(f"{prefix}{i}{j}_im")
    return cols


def _matrix_row(A):
    out = []
    for v in np.asarray(A).ravel():
        out.extend([v.real, v.imag])
    return out


# --- commands ------------------------------------------------------------

def cmd_construct(cfg: RunConfig, outdir):
    qfun, period = cfg.potential()
    xs = cfg.xgrid(period)
    m = cfg.m
    header = ["x"]
    for tag in ("Q", "Qp", "Qpp", "Qppp"):
        header += _matrix_columns(tag, m)
    rows = []
    for x in xs:
        row = [x]
        for order in range(4):
            row += _matrix_row(qfun(x, order))
        rows.append(row)
    write_csv(os.path.join(outdir, "potential.csv"), header, rows)

    q4 = cfg.quadruple_at(qfun)
    atomic_write(
        os.path.join(outdir, "pencils.json"),
        json.dumps({"schema": SCHEMA, "quadruple": q4.to_json()}, indent=2) + "\n",
    )
    meta = {
        "schema": SCHEMA,
        "command": "construct",
        "seed": cfg.seed,
        "bands": list(cfg.bands.edges),
        "m": m,
        "tolerances": cfg.tols,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    if period is not None:
        pot = HochstadtPotential(cfg.spec)
        c = pot.curve
        meta["curve"] = {
            "e": [c.e1, c.e2, c.e3], "g2": c.g2, "g3": c.g3,
            "omega1": c.omega1, "omega3_imag": c.omega3.imag,
        }
        meta["period"] = period
    atomic_write(os.path.join(outdir, "metadata.json"),
                 json.dumps(meta, indent=2) + "\n")
    return 0


def _band_interior_points(b: BandStructure, per_band, margin_frac=0.05, cap=10.0):
    pts = []
    for a, b_ in b.bands():
        if np.isinf(b_):
            b_ = a + cap
        w = b_ - a
        pts.extend(np.linspace(a + margin_frac * w, b_ - margin_frac * w, per_band))
    return pts


def cmd_verify(cfg: RunConfig, outdir):
    qfun, period = cfg.potential()
    b = cfg.bands
    m = cfg.m
    rng = np.random.default_rng(cfg.seed)
    q4 = cfg.quadruple_at(qfun)
    entries = []

    def add(name, tag, residual, tol):
        entries.append({
            "name": name, "tag": tag,
            "max_residual": float(residual), "tol": float(tol),
            "pass": bool(residual < tol),
        })

    scale = 20.0
    zs = rng.uniform(-scale, scale, 50) + 1j * rng.uniform(-scale, scale, 50)
    report = check_quadruple(q4, zs, ledger_tol=cfg.tols["ledger"])
    add("pencil-identity-ledger", "quadruple-algebra",
        report["max_residual"], cfg.tols["ledger"])

    if period is not None:
        span = period
    else:
        span = 10.0
    h = 1e-4 * span
    xs = np.linspace(0.25 * span, 0.75 * span, 7)

    def m_of_x(x, sign=+1):
        qq = cfg.quadruple_at(qfun, x0=x)
        from .weyl import weyl_m
        return weyl_m(qq.F, qq.G1, b, 1j, sign=sign)

    res = riccati_residual(lambda x: m_of_x(x, +1), lambda x: qfun(x, 0), 1j, xs, h)
    add("riccati-residual", "weyl-logderivative", res, cfg.tols["riccati"])

    jets = [np.stack([qfun(x, k) for k in range(4)]) for x in xs]
    if b.n == 0 and cfg.perturb == 0.0:
        skdv = max(np.linalg.norm(qfun(x, 1)) for x in xs)
    else:
        skdv = skdv_residual(jets, b)
    add("stationary-hierarchy", "kdv-residual", skdv, cfg.tols["skdv"])

    if b.n == 1:
        worst = {}
        for x in xs:
            rr = constraint_residuals(qfun(x, 0), qfun(x, 1), qfun(x, 2), b)
            for k, v in rr.items():
                worst[k] = max(worst.get(k, 0.0), v)
        add("pointwise-constraints", "potential-algebra",
            max(worst.values()), cfg.tols["constraints"])

    lams = _band_interior_points(b, 5)
    mp, mm = weyl_pair(q4)
    defect = reflectionless_check(mp, mm, lams)
    add("reflectionless-defect", "two-sided-limit", defect,
        cfg.tols["reflectionless"])

    xi_worst = 0.0
    for lam in lams:
        xi = xi_function(lambda z: green_diag(q4, z), lam)
        xi_worst = max(xi_worst, float(np.max(np.abs(np.diag(xi).real - 0.5))))
    below = b.edges[0] - 1.0
    xi0 = xi_function(lambda z: green_diag(q4, z), below)
    xi_worst_gap = float(np.max(np.abs(np.diag(xi0).real)))
    add("log-argument-on-bands", "half-identity", xi_worst, cfg.tols["xi"])
    add("log-argument-below-spectrum", "vanishing", xi_worst_gap, cfg.tols["xi"])

    if b.n == 1 and m == 1 and cfg.perturb == 0.0:
        E = b.edges
        window = (E[0] - 0.5, E[2] + 1.5)
        edges = floquet_band_edges(
            lambda x: qfun(x, 0)[0, 0].real, period, window,
            npoints=241, root_tol=1e-9,
        )
        err = max(min(abs(e - t) for e in edges) for t in E)
        add("periodic-spectrum-edges", "floquet", err, cfg.tols["floquet"])

    ok = all(e["pass"] for e in entries)
    payload = {
        "schema": SCHEMA,
        "command": "verify",
        "seed": cfg.seed,
        "pass": ok,
        "entries": entries,
    }
    atomic_write(os.path.join(outdir, "report.json"),
                 json.dumps(payload, indent=2) + "\n")
    for e in entries:
        status = "PASS" if e["pass"] else "FAIL"
        print(f"{status} {e['name']}: {e['max_residual']:.3e} (tol {e['tol']:.1e})")
    return 0 if ok else 1


def cmd_sample(cfg: RunConfig, outdir):
    qfun, period = cfg.potential()
    b = cfg.bands
    m = cfg.m
    q4 = cfg.quadruple_at(qfun)

    lams = _band_interior_points(b, max(cfg.z_points // (b.n + 1), 4))
    gaps = [0.5 * (a + b_) for a, b_ in b.gaps()]

    rows = []
    for lam in lams + gaps:
        g = green_diag(q4, lam + 1e-3j)
        rows.append([lam, 1e-3] + _matrix_row(g))
    write_csv(os.path.join(outdir, "green.csv"),
              ["lambda", "eps"] + _matrix_columns("g", m), rows)

    dens = stieltjes_invert(lambda z: green_diag(q4, z), lams + gaps)
    rows = [[lam] + _matrix_row(d) for lam, d in zip(lams + gaps, dens)]
    write_csv(os.path.join(outdir, "density.csv"),
              ["lambda"] + _matrix_columns("rho", m), rows)

    rows = []
    for lam in [b.edges[0] - 1.0] + lams:
        xi = xi_function(lambda z: green_diag(q4, z), lam)
        rows.append([lam] + _matrix_row(xi))
    write_csv(os.path.join(outdir, "xi.csv"),
              ["lambda"] + _matrix_columns("xi", m), rows)

    if b.n == 1 and m == 1:
        E = b.edges
        if cfg.z_window is not None:
            lo, hi = (float(v) for v in cfg.z_window)
        else:
            lo, hi = E[0] - 0.5, E[2] + 1.5
        rows = []
        for lam in np.linspace(lo, hi, cfg.z_points):
            d = floquet_discriminant(lambda x: qfun(x, 0)[0, 0].real, period, lam)
            rows.append([lam, d])
        write_csv(os.path.join(outdir, "discriminant.csv"),
                  ["lambda", "discriminant"], rows)
    return 0


# --- entry point ---------------------------------------------------------

def _parse_tol_overrides(pairs):
    out = {}
    for p in pairs or []:
        if "=" not in p:
            raise ConfigError("--tol", f"expected key=value, got {p!r}")
        k, v = p.split("=", 1)
        out[k] = v
    return out


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="finiteband",
        description="Construct and verify reflectionless finite-band "
                    "matrix potentials.",
    )
    parser.add_argument("command", choices=["construct", "verify", "sample"])
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--tol", action="append", metavar="KEY=VAL")
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)

    try:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError("--config", str(exc)) from None
        except json.JSONDecodeError as exc:
            raise ParseError(f"config is not valid JSON: {exc}") from None
        cfg = RunConfig(raw, tol_overrides=_parse_tol_overrides(args.tol),
                        seed_override=args.seed)
        os.makedirs(args.out, exist_ok=True)
        handler = {
            "construct": cmd_construct,
            "verify": cmd_verify,
            "sample": cmd_sample,
        }[args.command]
        return handler(cfg, args.out)
    except (ConfigError, ParseError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (QuadratureNotConverged, ExtrapolationDiverged, NoConvergence,
            StepUnderflow, IdentityDrift) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except FinitebandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
