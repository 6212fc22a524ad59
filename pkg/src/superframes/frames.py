"""Frame-equation matrices and compatibility residuals.

``assemble`` transcribes the first-order frame system d_i Omega = U_i Omega
for each case; ``zero_curvature_residual`` measures
d_i U_j - d_j U_i + [U_j, U_i] for every index pair, with numeric
x-derivatives and exact theta-derivatives; ``gauss_codazzi_residual``
evaluates each case's scalar compatibility equations directly, independent
of the matrix route.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from superframes.casedefs import FRAME_DIMS, REQUIRED_FIELDS, hyp_c1_sigma_squared, omega_poly
from superframes.fields import (REPORT_DEGREE, ConformalGrid, Field, d_theta, d_x, tp_pad)


class MissingFieldError(KeyError):
    def __init__(self, tag, name):
        super().__init__(f"case {tag} needs geometry field {name!r}")


# ---------------------------------------------------------------------------
# Sparse matrices of fields.
# ---------------------------------------------------------------------------

class FieldMatrix:
    """Square matrix with Field entries, stored sparsely (zeros omitted)."""

    __slots__ = ("grid", "dim", "entries")

    def __init__(self, grid, dim, entries=None):
        self.grid = grid
        self.dim = dim
        self.entries = dict(entries or {})

    def set(self, r, c, value):
        if not isinstance(value, Field):
            value = Field.constant(self.grid, value)
        self.entries[(r, c)] = value

    def get(self, r, c):
        return self.entries.get((r, c))

    def deriv(self, k):
        op = (lambda f: d_x(f, k)) if k in (1, 2) else (lambda f: d_theta(f, k))
        return FieldMatrix(self.grid, self.dim,
                           {rc: op(f) for rc, f in self.entries.items()})

    def __add__(self, other):
        out = dict(self.entries)
        for rc, f in other.entries.items():
            out[rc] = out[rc] + f if rc in out else f
        return FieldMatrix(self.grid, self.dim, out)

    def __neg__(self):
        return FieldMatrix(self.grid, self.dim,
                           {rc: -f for rc, f in self.entries.items()})

    def __sub__(self, other):
        return self + (-other)

    def __matmul__(self, other):
        out = {}
        cols = {}
        for (r, c), f in other.entries.items():
            cols.setdefault(r, []).append((c, f))
        for (r, m), fa in self.entries.items():
            for c, fb in cols.get(m, ()):
                prod = fa * fb
                key = (r, c)
                out[key] = out[key] + prod if key in out else prod
        return FieldMatrix(self.grid, self.dim, out)

    def scaled(self, z):
        return FieldMatrix(self.grid, self.dim,
                           {rc: f * z for rc, f in self.entries.items()})

    def to_dense(self):
        """(n, n, dim, dim, p, q) array, entries padded to a common shape."""
        p = max((f.theta_shape[0] for f in self.entries.values()), default=1)
        q = max((f.theta_shape[1] for f in self.entries.values()), default=1)
        n = self.grid.n
        out = np.zeros((n, n, self.dim, self.dim, p, q), dtype=np.complex128)
        for (r, c), f in self.entries.items():
            out[:, :, r, c] = tp_pad(f.values, p, q)
        return out

    def max_abs(self):
        return max((f.max_abs() for f in self.entries.values()), default=0.0)


# ---------------------------------------------------------------------------
# Residual reports (shared by the matrix route and the scalar suites).
# ---------------------------------------------------------------------------

@dataclass
class ResidualEntry:
    i: int
    j: int
    name: str
    sector: tuple
    max: float
    l2: float

    def to_json(self):
        return {"i": self.i, "j": self.j, "name": self.name,
                "sector": list(self.sector), "max": self.max, "l2": self.l2}


@dataclass
class ResidualReport:
    case: str
    grid: ConformalGrid
    entries: list = field(default_factory=list)
    tol_max: float = None
    tol_l2: float = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        h = self.grid.h
        if self.tol_max is None:
            self.tol_max = 50.0 * h * h
        if self.tol_l2 is None:
            self.tol_l2 = 10.0 * h * h

    @property
    def overall_max(self):
        return max((e.max for e in self.entries), default=0.0)

    @property
    def passed(self):
        return all(e.max <= self.tol_max and e.l2 <= self.tol_l2 for e in self.entries)

    def worst(self):
        return max(self.entries, key=lambda e: e.max, default=None)

    def to_json(self):
        doc = {"case": self.case,
               "grid": self.grid.to_json(),
               "pairs": [e.to_json() for e in self.entries],
               "overall_max": self.overall_max,
               "pass": self.passed,
               "tolerances": {"max": self.tol_max, "l2": self.tol_l2}}
        doc.update(self.extra)
        return doc

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2)
            fh.write("\n")


def _sector_entries(i, j, name, fields_list, nvals):
    """Per-sector max/RMS over a list of residual Fields."""
    pmax = max((f.theta_shape[0] for f in fields_list), default=1)
    qmax = max((f.theta_shape[1] for f in fields_list), default=1)
    out = []
    for m in range(min(pmax, REPORT_DEGREE + 1)):
        for n in range(min(qmax, REPORT_DEGREE + 1)):
            sq = 0.0
            mx = 0.0
            for f in fields_list:
                sec = np.abs(f.sector(m, n))
                mx = max(mx, float(sec.max()))
                sq += float((sec * sec).sum())
            out.append(ResidualEntry(i, j, name, (m, n), mx, float(np.sqrt(sq / nvals))))
    return out


# ---------------------------------------------------------------------------
# Assembly.
# ---------------------------------------------------------------------------

@dataclass
class FrameSystem:
    """Matrices of the frame system for one case."""

    spec: object
    grid: ConformalGrid
    dim: int
    indices: tuple
    matrices: dict  # index -> FieldMatrix

    def matrix(self, i):
        return self.matrices[i]


def _need(geom, tag, *names):
    out = []
    for name in names:
        if name not in geom:
            raise MissingFieldError(tag, name)
        out.append(geom[name])
    return out


def assemble(spec, geom):
    """Build the frame matrices U_i from a case's geometry fields.

    ``geom`` maps field names (see casedefs.REQUIRED_FIELDS) to Fields.
    Raises on missing fields and on division by a field whose theta-free
    part vanishes on the grid.
    """
    builder = _BUILDERS[spec.tag]
    some = next(iter(geom.values()))
    grid = some.grid
    dim, indices = FRAME_DIMS[spec.tag]
    mats = builder(spec, geom, grid, dim)
    return FrameSystem(spec, grid, dim, indices, mats)


def _assemble_euc_f0(spec, geom, grid, dim):
    u, Q, H = _need(geom, spec.tag, *REQUIRED_FIELDS[spec.tag])
    eu = u.exp()
    emu = (-u).exp()
    Qb = Q.conj()
    U1 = FieldMatrix(grid, dim)
    U1.set(0, 0, d_x(u, 1))
    U1.set(0, 2, Q)
    U1.set(1, 2, 0.5 * H * eu)
    U1.set(2, 0, -H)
    U1.set(2, 1, -2.0 * emu * Q)
    U2 = FieldMatrix(grid, dim)
    U2.set(0, 2, 0.5 * H * eu)
    U2.set(1, 1, d_x(u, 2))
    U2.set(1, 2, Qb)
    U2.set(2, 0, -2.0 * emu * Qb)
    U2.set(2, 1, -H)
    return {1: U1, 2: U2}


def _assemble_euc_f2(spec, geom, grid, dim):
    u, q, h = _need(geom, spec.tag, *REQUIRED_FIELDS[spec.tag])
    a, k = spec.a, spec.k
    W = Field.constant(grid, omega_poly(spec))
    Winv = W.reciprocal()
    eu = u.exp()
    emu = (-u).exp()
    qb = q.conj()
    U1 = FieldMatrix(grid, dim)
    U1.set(0, 0, d_x(u, 1))
    U1.set(0, 3, q * W)
    U1.set(1, 2, (-a / (2.0 * k * k)) * eu * W)
    U1.set(1, 3, 0.5 * eu * h * W)
    U1.set(2, 0, a * Winv)
    U1.set(3, 0, -h * Winv)
    U1.set(3, 1, -2.0 * emu * q * Winv)
    U2 = FieldMatrix(grid, dim)
    U2.set(0, 2, (-a / (2.0 * k * k)) * eu * W)
    U2.set(0, 3, 0.5 * eu * h * W)
    U2.set(1, 1, d_x(u, 2))
    U2.set(1, 3, qb * W)
    U2.set(2, 1, a * Winv)
    U2.set(3, 0, -2.0 * emu * qb * Winv)
    U2.set(3, 1, -h * Winv)
    U3 = FieldMatrix(grid, dim)
    U3.set(0, 0, a * Winv)
    U3.set(1, 1, a * Winv)
    return {1: U1, 2: U2, 3: U3}


def _assemble_euc_f3_c1(spec, geom, grid, dim):
    u, q, h = _need(geom, spec.tag, *REQUIRED_FIELDS[spec.tag])
    k = spec.k
    alpha = complex(spec.alpha)
    alphab = alpha.conjugate()
    w = Field.constant(grid, omega_poly(spec))
    winv = w.reciprocal()
    eu = u.exp()
    emu = (-u).exp()
    qb = q.conj()
    euw = eu * w
    U1 = FieldMatrix(grid, dim)
    U1.set(0, 0, d_x(u, 1))
    U1.set(0, 4, q * w)
    U1.set(1, 2, (-alphab / (k * k)) * euw)
    U1.set(1, 3, (-alpha / (k * k)) * euw)
    U1.set(1, 4, 0.5 * h * euw)
    U1.set(2, 0, alpha * winv)
    U1.set(3, 0, alphab * winv)
    U1.set(4, 0, -h * winv)
    U1.set(4, 1, -2.0 * emu * q * winv)
    U2 = FieldMatrix(grid, dim)
    U2.set(0, 2, (-alphab / (k * k)) * euw)
    U2.set(0, 3, (-alpha / (k * k)) * euw)
    U2.set(0, 4, 0.5 * h * euw)
    U2.set(1, 1, d_x(u, 2))
    U2.set(1, 4, qb * w)
    U2.set(2, 1, alpha * winv)
    U2.set(3, 1, alphab * winv)
    U2.set(4, 0, -2.0 * emu * qb * winv)
    U2.set(4, 1, -h * winv)
    U3 = FieldMatrix(grid, dim)
    U3.set(0, 0, alpha * winv)
    U3.set(1, 1, alpha * winv)
    U4 = FieldMatrix(grid, dim)
    U4.set(0, 0, alphab * winv)
    U4.set(1, 1, alphab * winv)
    return {1: U1, 2: U2, 3: U3, 4: U4}


def _assemble_euc_f3_c2(spec, geom, grid, dim):
    u, Q, H = _need(geom, spec.tag, *REQUIRED_FIELDS[spec.tag])
    eu = u.exp()
    emu = (-u).exp()
    Qb = Q.conj()
    U1 = FieldMatrix(grid, dim)
    U1.set(0, 0, d_x(u, 1))
    U1.set(0, 4, Q)
    U1.set(1, 4, 0.5 * H * eu)
    U1.set(4, 0, -H)
    U1.set(4, 1, -2.0 * emu * Q)
    U2 = FieldMatrix(grid, dim)
    U2.set(0, 4, 0.5 * H * eu)
    U2.set(1, 1, d_x(u, 2))
    U2.set(1, 4, Qb)
    U2.set(4, 0, -2.0 * emu * Qb)
    U2.set(4, 1, -H)
    return {1: U1, 2: U2, 3: FieldMatrix(grid, dim), 4: FieldMatrix(grid, dim)}


def _assemble_cur_f0(spec, geom, grid, dim):
    u, Q, H = _need(geom, spec.tag, *REQUIRED_FIELDS[spec.tag])
    c = spec.c
    eu = u.exp()
    emu = (-u).exp()
    Qb = Q.conj()
    U1 = FieldMatrix(grid, dim)
    U1.set(0, 0, d_x(u, 1))
    U1.set(0, 2, Q)
    U1.set(1, 2, 0.5 * H * eu)
    U1.set(1, 3, (-1.0 / (2.0 * c)) * eu)
    U1.set(2, 0, -H)
    U1.set(2, 1, -2.0 * emu * Q)
    U1.set(3, 0, 1.0)
    U2 = FieldMatrix(grid, dim)
    U2.set(0, 2, 0.5 * H * eu)
    U2.set(0, 3, (-1.0 / (2.0 * c)) * eu)
    U2.set(1, 1, d_x(u, 2))
    U2.set(1, 2, Qb)
    U2.set(2, 0, -2.0 * emu * Qb)
    U2.set(2, 1, -H)
    U2.set(3, 1, 1.0)
    return {1: U1, 2: U2}


def _assemble_hyp_f3_c1(spec, geom, grid, dim):
    u, H, G = _need(geom, spec.tag, *REQUIRED_FIELDS[spec.tag])
    k, c = spec.k, spec.c
    w = geom.get("omega") or Field.constant(grid, omega_poly(spec))
    w3 = d_theta(w, 3)
    w4 = d_theta(w, 4)
    winv = w.reciprocal()
    eu = u.exp()
    w2 = w * w
    euw = eu * w
    U1 = FieldMatrix(grid, dim)
    U1.set(0, 0, d_x(u, 1))
    U1.set(1, 2, (-1.0 / (k * k)) * euw * w4)
    U1.set(1, 3, (-1.0 / (k * k)) * euw * w3)
    U1.set(1, 4, 0.5 * eu * H * w2)
    U1.set(1, 5, (-1.0 / (2.0 * c)) * eu * w2)
    U1.set(2, 0, w3 * winv)
    U1.set(3, 0, w4 * winv)
    U1.set(4, 0, -H)
    U1.set(5, 0, 1.0)
    U2 = FieldMatrix(grid, dim)
    U2.set(0, 2, (-1.0 / (k * k)) * euw * w4)
    U2.set(0, 3, (-1.0 / (k * k)) * euw * w3)
    U2.set(0, 4, 0.5 * eu * H * w2)
    U2.set(0, 5, (-1.0 / (2.0 * c)) * eu * w2)
    U2.set(1, 1, d_x(u, 2))
    U2.set(2, 1, w3 * winv)
    U2.set(3, 1, w4 * winv)
    U2.set(4, 1, -H)
    U2.set(5, 1, 1.0)
    U3 = FieldMatrix(grid, dim)
    U3.set(0, 0, w3 * winv)
    U3.set(1, 1, w3 * winv)
    U3.set(3, 4, (k * k / 2.0) * G)
    U3.set(3, 5, -k * k / (2.0 * c))
    U3.set(4, 2, -G)
    U3.set(5, 2, 1.0)
    U4 = FieldMatrix(grid, dim)
    U4.set(0, 0, w4 * winv)
    U4.set(1, 1, w4 * winv)
    U4.set(2, 4, (k * k / 2.0) * G)
    U4.set(2, 5, -k * k / (2.0 * c))
    U4.set(4, 3, -G)
    U4.set(5, 3, 1.0)
    return {1: U1, 2: U2, 3: U3, 4: U4}


def _assemble_hyp_f3_c2(spec, geom, grid, dim):
    phi, psi, Q, H, G = _need(geom, spec.tag, *REQUIRED_FIELDS[spec.tag])
    c = spec.c
    E = phi.exp()
    Em = (-phi).exp()
    S = psi.exp()
    Qb = geom.get("Q_conj") or Q.conj()
    p1, p2 = d_x(psi, 1), d_x(psi, 2)
    U1 = FieldMatrix(grid, dim)
    U1.set(0, 0, d_x(phi, 1))
    U1.set(0, 4, Q)
    U1.set(1, 4, 0.5 * E * H)
    U1.set(1, 5, (-1.0 / (2.0 * c)) * E)
    U1.set(2, 2, 0.5 * p1)
    U1.set(3, 3, 0.5 * p1)
    U1.set(4, 0, -H)
    U1.set(4, 1, -2.0 * Em * Q)
    U1.set(5, 0, 1.0)
    U2 = FieldMatrix(grid, dim)
    U2.set(0, 4, 0.5 * E * H)
    U2.set(0, 5, (-1.0 / (2.0 * c)) * E)
    U2.set(1, 1, d_x(phi, 2))
    U2.set(1, 4, Qb)
    U2.set(2, 2, 0.5 * p2)
    U2.set(3, 3, 0.5 * p2)
    U2.set(4, 0, -2.0 * Em * Qb)
    U2.set(4, 1, -H)
    U2.set(5, 1, 1.0)
    SEm = S * Em
    U3 = FieldMatrix(grid, dim)
    U3.set(0, 2, 0.5 * p1)
    U3.set(1, 2, 0.5 * p2)
    U3.set(3, 0, -0.5 * SEm * p2)
    U3.set(3, 1, -0.5 * SEm * p1)
    U3.set(3, 4, 0.5 * S * G)
    U3.set(3, 5, (-1.0 / (2.0 * c)) * S)
    U3.set(4, 2, -G)
    U3.set(5, 2, 1.0)
    U4 = FieldMatrix(grid, dim)
    U4.set(0, 3, 0.5 * p1)
    U4.set(1, 3, 0.5 * p2)
    U4.set(2, 0, -0.5 * SEm * p2)
    U4.set(2, 1, -0.5 * SEm * p1)
    U4.set(2, 4, 0.5 * S * G)
    U4.set(2, 5, (-1.0 / (2.0 * c)) * S)
    U4.set(4, 3, -G)
    U4.set(5, 3, 1.0)
    return {1: U1, 2: U2, 3: U3, 4: U4}


_BUILDERS = {
    "euc-f0": _assemble_euc_f0,
    "euc-f2": _assemble_euc_f2,
    "euc-f3-c1": _assemble_euc_f3_c1,
    "euc-f3-c2": _assemble_euc_f3_c2,
    "cur-f0": _assemble_cur_f0,
    "hyp-f3-c1": _assemble_hyp_f3_c1,
    "hyp-f3-c2": _assemble_hyp_f3_c2,
}


# ---------------------------------------------------------------------------
# Zero-curvature residual.
# ---------------------------------------------------------------------------

def zero_curvature_fields(fs):
    """Residual matrices d_i U_j - d_j U_i + [U_j, U_i] per index pair."""
    out = {}
    for ii, i in enumerate(fs.indices):
        for j in fs.indices[ii + 1:]:
            Ui, Uj = fs.matrix(i), fs.matrix(j)
            out[(i, j)] = Ui.deriv(j).__neg__() + Uj.deriv(i) + (Uj @ Ui) - (Ui @ Uj)
    return out


def zero_curvature_residual(fs, tol_max=None, tol_l2=None):
    report = ResidualReport(fs.spec.tag, fs.grid, tol_max=tol_max, tol_l2=tol_l2)
    nvals = fs.grid.n ** 2 * fs.dim ** 2
    for (i, j), R in zero_curvature_fields(fs).items():
        fields_list = list(R.entries.values())
        if not fields_list:
            report.entries.append(ResidualEntry(i, j, "zcc", (0, 0), 0.0, 0.0))
            continue
        report.entries.extend(_sector_entries(i, j, "zcc", fields_list, nvals))
    return report


# ---------------------------------------------------------------------------
# Scalar Gauss-Codazzi residuals (independent of the matrix route).
# ---------------------------------------------------------------------------

def _gauss_base(u, Q, H):
    """d1 d2 u + (e^u/2) H^2 - 2 e^{-u} |Q|^2 as a Field."""
    eu = u.exp()
    emu = (-u).exp()
    return d_x(d_x(u, 1), 2) + 0.5 * eu * (H * H) - 2.0 * emu * (Q * Q.conj())


def _codazzi_pair(u, Q, H):
    eu = u.exp()
    return (d_x(Q, 2) - 0.5 * eu * d_x(H, 1),
            d_x(Q.conj(), 1) - 0.5 * eu * d_x(H, 2))


def curvature_excess(spec, u):
    """The exact extra curvature term this case adds to the body equations.

    euc-f2: (e^u/2) a^2/k^2; euc-f3-c1: (e^u/2) 4|alpha|^2/k^2;
    cur-f0: (e^u/2) / c; flat body cases: zero.
    """
    eu = u.exp()
    if spec.tag == "euc-f2":
        return eu * (0.5 * spec.a ** 2 / spec.k ** 2)
    if spec.tag == "euc-f3-c1":
        return eu * (0.5 * 4.0 * abs(spec.alpha) ** 2 / spec.k ** 2)
    if spec.tag == "cur-f0":
        return eu * (0.5 / spec.c)
    return Field.zero(u.grid)


def gauss_codazzi_fields(spec, geom):
    """Named residual Fields of the case's scalar compatibility equations."""
    tag = spec.tag
    if tag in ("euc-f0", "euc-f3-c2", "cur-f0"):
        u, Q, H = _need(geom, tag, "u", "Q", "H")
        cod_q, cod_qb = _codazzi_pair(u, Q, H)
        gauss = _gauss_base(u, Q, H)
        if tag == "cur-f0":
            gauss = gauss + curvature_excess(spec, u)
        return {"gauss": gauss, "codazzi_q": cod_q, "codazzi_qbar": cod_qb}
    if tag in ("euc-f2", "euc-f3-c1"):
        u, q, h = _need(geom, tag, *REQUIRED_FIELDS[tag])
        cod_q, cod_qb = _codazzi_pair(u, q, h)
        gauss = _gauss_base(u, q, h) + curvature_excess(spec, u)
        return {"gauss": gauss, "codazzi_q": cod_q, "codazzi_qbar": cod_qb}
    if tag == "hyp-f3-c1":
        u = _need(geom, tag, "u")[0]
        sig2 = hyp_c1_sigma_squared(spec)
        out = {"conformal_factor": d_x(d_x(u, 1), 2) + (2.0 * sig2) * u.exp()}
        if "G" in geom:
            g_target = spec.eps * np.sqrt(-1.0 / spec.c)
            out["g_constant"] = geom["G"] - g_target
        return out
    if tag == "hyp-f3-c2":
        return {"reduced_metric": hyp_c2_reduced_metric_residual(spec, geom)}
    raise ValueError(f"unknown case {tag}")


def hyp_c2_reduced_metric_residual(spec, geom):
    """The single remaining equation of hyp-f3-c2 in metric-closed form.

    d1 d2 phi = e^phi/c + d1d2 psi / B
                + (c e^{-phi}/2)/B * ( (d1d2 psi + d1 psi d2 psi / 2)^2
                + (2 d1 phi d1 psi - 2 d1^2 psi - (d1 psi)^2)
                * (2 d2 phi d2 psi - 2 d2^2 psi - (d2 psi)^2) ),
    B = 1 + c e^{-phi} d1 psi d2 psi.

    A frame-compatibility rendering of the same reduction exists and does
    not coincide with this closed form (see the case catalog); this closed
    form is the case's gating equation.
    """
    phi, psi = _need(geom, spec.tag, "phi", "psi")
    c = spec.c
    E = phi.exp()
    Em = (-phi).exp()
    p1, p2 = d_x(psi, 1), d_x(psi, 2)
    f1, f2 = d_x(phi, 1), d_x(phi, 2)
    p11 = d_x(p1, 1)
    p22 = d_x(p2, 2)
    p12 = d_x(p1, 2)
    B = 1.0 + c * Em * (p1 * p2)
    Binv = B.reciprocal()
    P = p12 + 0.5 * (p1 * p2)
    A1 = 2.0 * (f1 * p1) - 2.0 * p11 - p1 * p1
    A2 = 2.0 * (f2 * p2) - 2.0 * p22 - p2 * p2
    rhs = ((1.0 / c) * E + p12 * Binv
           + (0.5 * c) * Em * Binv * (P * P + A1 * A2))
    return d_x(d_x(phi, 1), 2) - rhs


def hyp_c2_constraint_margin(spec, geom):
    """Node-wise margin of the strict inequality d1 psi d2 psi < -e^phi/c.

    Returns the real margin field -e^phi/c - d1 psi d2 psi (must be > 0)."""
    phi, psi = _need(geom, spec.tag, "phi", "psi")
    margin = (-1.0 / spec.c) * phi.exp() - d_x(psi, 1) * d_x(psi, 2)
    return margin.body().real


def gauss_codazzi_residual(spec, geom, tol_max=None, tol_l2=None):
    some = next(iter(geom.values()))
    report = ResidualReport(spec.tag, some.grid, tol_max=tol_max, tol_l2=tol_l2)
    nvals = some.grid.n ** 2
    for name, f in gauss_codazzi_fields(spec, geom).items():
        report.entries.extend(_sector_entries(0, 0, name, [f], nvals))
    return report
