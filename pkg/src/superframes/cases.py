"""Case catalog: metrics, closed-form families, derived quantities, and the
full structural-equation residual suites for the two-odd-variable cases.

The structural-equation suites evaluate every equation in a denominator-
cleared polynomial form (written in E = e^phi, S = e^psi rather than phi,
psi themselves). This keeps the evaluation exact in every reported theta
sector and supports metric factors whose theta-free part vanishes, where
phi itself is not representable. The clearing factor of each equation is
fixed and documented in ``docs/case_catalog.md``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from superframes.casedefs import (CASE_TAGS, CaseSpec, ConstraintViolation,
                                  FRAME_DIMS, REQUIRED_FIELDS, hyp_c1_sigma_squared,
                                  omega_poly)
from superframes.fields import (BodyVanishesError, ConformalGrid, Field, ThetaPoly,
                                d_theta, d_x, field_from_csv, field_to_csv)
from superframes.frames import (ResidualEntry, ResidualReport, _gauss_base,
                                _sector_entries, gauss_codazzi_fields,
                                gauss_codazzi_residual, hyp_c2_constraint_margin)

__all__ = [
    "CaseSpec", "CASE_TAGS", "GeometryBundle", "ConstraintViolation",
    "metric", "liouville_u", "conformal_factor", "liouville_normalization_constant",
    "body_family", "hyp_case1_family", "hyp_case2_family", "hyp_case2_derived",
    "appendix_a_residuals", "appendix_b_residuals",
    "appendix_a_for_bundle", "appendix_b_for_bundle", "curved_f2_residual",
]


@dataclass
class GeometryBundle:
    """Named geometry fields of one case instance."""

    spec: CaseSpec
    grid: ConformalGrid
    fields: dict

    def __getitem__(self, name):
        return self.fields[name]

    def __contains__(self, name):
        return name in self.fields

    def check_reality(self, tol=1e-10):
        """Reality constraints: u, phi, psi, h, H, G real; Q_conj = conj(Q)."""
        bad = []
        for name in ("u", "phi", "psi", "h", "H", "G"):
            f = self.fields.get(name)
            if f is not None and not f.is_real(tol):
                bad.append(name)
        if bad:
            raise ValueError(f"fields not real-valued: {bad}")
        return True

    # -- serialization ----------------------------------------------------
    def save(self, outdir):
        os.makedirs(outdir, exist_ok=True)
        names = {}
        for name, f in self.fields.items():
            fname = f"{name}.csv"
            field_to_csv(f, os.path.join(outdir, fname))
            names[name] = fname
        spec = self.spec
        manifest = {
            "case": spec.tag,
            "params": {"a": spec.a, "b": spec.b, "k": spec.k,
                       "alpha": [spec.alpha.real, spec.alpha.imag],
                       "beta": [spec.beta.real, spec.beta.imag],
                       "gamma": spec.gamma, "c": spec.c, "eps": spec.eps},
            "grid": self.grid.to_json(),
            "fields": names,
        }
        with open(os.path.join(outdir, "manifest.json"), "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, indir):
        with open(os.path.join(indir, "manifest.json"), encoding="utf-8") as fh:
            manifest = json.load(fh)
        p = manifest["params"]
        spec = CaseSpec(manifest["case"], a=p["a"], b=p["b"], k=p["k"],
                        alpha=complex(*p["alpha"]), beta=complex(*p["beta"]),
                        gamma=p["gamma"], c=p["c"], eps=p["eps"])
        g = manifest["grid"]
        grid = ConformalGrid(complex(g["center"][0], g["center"][1]),
                             g["half_width"], g["n"])
        fields = {name: field_from_csv(grid, os.path.join(indir, fname))
                  for name, fname in manifest["fields"].items()}
        return cls(spec, grid, fields)


# ---------------------------------------------------------------------------
# Metrics.
# ---------------------------------------------------------------------------

def metric(spec, geom):
    """Symmetric matrix of metric-coefficient Fields for the case."""
    tag = spec.tag
    grid = next(iter(geom.values())).grid

    def zeros(dim):
        return [[Field.zero(grid) for _ in range(dim)] for _ in range(dim)]

    if tag in ("euc-f0", "cur-f0"):
        g = zeros(2)
        half_eu = 0.5 * geom["u"].exp()
        g[0][1] = g[1][0] = half_eu
        return g
    if tag == "euc-f2":
        g = zeros(3)
        W = Field.constant(grid, omega_poly(spec))
        g01 = 0.5 * geom["u"].exp() * W * W
        g[0][1] = g[1][0] = g01
        g[2][2] = Field.constant(grid, spec.k ** 2)
        return g
    if tag in ("euc-f3-c1", "hyp-f3-c1"):
        g = zeros(4)
        w = Field.constant(grid, omega_poly(spec))
        g01 = 0.5 * geom["u"].exp() * w * w
        g[0][1] = g[1][0] = g01
        g34 = Field.constant(grid, 0.5 * spec.k ** 2)
        g[2][3] = g[3][2] = g34
        return g
    if tag == "euc-f3-c2":
        g = zeros(4)
        g01 = 0.5 * geom["u"].exp()
        g[0][1] = g[1][0] = g01
        g34 = 0.5 * Field.constant(grid, omega_poly(spec))
        g[2][3] = g[3][2] = g34
        return g
    if tag == "hyp-f3-c2":
        g = zeros(4)
        g01 = 0.5 * geom["phi"].exp()
        g[0][1] = g[1][0] = g01
        g34 = 0.5 * geom["psi"].exp()
        g[2][3] = g[3][2] = g34
        return g
    raise ValueError(f"unknown case {tag}")


# ---------------------------------------------------------------------------
# Conformal-factor (Liouville-type) solutions.
# ---------------------------------------------------------------------------

def liouville_normalization_constant():
    """Fix C in u = ln(C |f'|^2 / (sigma^2 (1+|f|^2)^2)) symbolically.

    Differentiates the ansatz exactly (sympy) and solves the defining
    equation d1 d2 u = -2 sigma^2 e^u for C. Returns the resolved constant.
    """
    import sympy as sp

    x1, x2, C, sig = sp.symbols("x1 x2 C sigma")
    f = sp.Function("f")
    fb = sp.Function("fb")
    # holomorphic/antiholomorphic pair: |f|^2 -> f(x1) fb(x2), |f'|^2 likewise
    u = sp.log(C * sp.diff(f(x1), x1) * sp.diff(fb(x2), x2)
               / (sig ** 2 * (1 + f(x1) * fb(x2)) ** 2))
    residual = sp.simplify(sp.diff(u, x1, x2) + 2 * sig ** 2 * sp.exp(u))
    sols = sp.solve(sp.Eq(residual, 0), C)
    if len(sols) != 1:
        raise RuntimeError(f"normalization not unique: {sols}")
    return float(sols[0])


def conformal_factor(grid, f, fprime, kappa, normalization=1.0):
    """A solution u of d1 d2 u = kappa e^u from a holomorphic map f.

    kappa < 0: u = ln(C |f'|^2 / (sigma^2 (1+|f|^2)^2)), sigma^2 = -kappa/2.
    kappa > 0: u = ln(C |f'|^2 / ((kappa/2) (1-|f|^2)^2)), needs |f| != 1.
    """
    if kappa == 0:
        raise ValueError("kappa must be nonzero")
    x1 = grid.x1
    fv = np.asarray(f(x1), dtype=np.complex128) + np.zeros_like(x1)
    fpv = np.asarray(fprime(x1), dtype=np.complex128) + np.zeros_like(x1)
    if np.abs(fpv).min() < 1e-8:
        raise ValueError("f' vanishes on the grid")
    lam = abs(kappa) / 2.0
    if kappa < 0:
        denom = lam * (1.0 + np.abs(fv) ** 2) ** 2
    else:
        gap = np.abs(1.0 - np.abs(fv) ** 2)
        if gap.min() < 1e-8:
            raise ValueError("|f| hits 1 on the grid; shrink or rescale f")
        denom = lam * (1.0 - np.abs(fv) ** 2) ** 2
    u = np.log(normalization * np.abs(fpv) ** 2 / denom)
    return Field(grid, u.astype(np.complex128))


def liouville_u(grid, f, fprime, sigma, normalization=1.0):
    """Solution of d1 d2 u = -2 sigma^2 e^u (the resolved normalization is 1)."""
    if sigma == 0:
        raise ValueError("sigma must be nonzero")
    return conformal_factor(grid, f, fprime, -2.0 * sigma ** 2, normalization)


# ---------------------------------------------------------------------------
# Families (constant mean curvature, vanishing Hopf-type term).
# ---------------------------------------------------------------------------

def _f_pair(f, fprime):
    if f is None:
        return (lambda z: z), (lambda z: np.ones_like(z))
    if fprime is None:
        raise ValueError("supply f' together with f")
    return f, fprime


def body_family(spec, grid, h0=1.0, f=None, fprime=None):
    """Bundle for the body-type cases: Q = 0, constant mean curvature h0,
    conformal factor solving the case's curvature equation."""
    f, fprime = _f_pair(f, fprime)
    tag = spec.tag
    if tag in ("euc-f0", "euc-f3-c2"):
        kappa = -0.5 * h0 ** 2
    elif tag == "cur-f0":
        kappa = -0.5 * (h0 ** 2 + 1.0 / spec.c)
    elif tag == "euc-f2":
        kappa = -0.5 * (h0 ** 2 + spec.a ** 2 / spec.k ** 2)
    elif tag == "euc-f3-c1":
        kappa = -0.5 * (h0 ** 2 + 4.0 * abs(spec.alpha) ** 2 / spec.k ** 2)
    else:
        raise ValueError(f"body_family does not build {tag}")
    u = conformal_factor(grid, f, fprime, kappa)
    zero = Field.zero(grid)
    h = Field.constant(grid, h0)
    if tag in ("euc-f2", "euc-f3-c1"):
        return GeometryBundle(spec, grid, {"u": u, "q": zero, "h": h})
    return GeometryBundle(spec, grid, {"u": u, "Q": zero, "H": h})


def hyp_case1_family(spec, grid, f=None, fprime=None, sigma=None):
    """Closed-form family of the curved two-odd-variable case 1.

    omega = alpha theta3 theta4 + beta theta3 + conj(beta) theta4 + gamma,
    u solves d1 d2 u = -2 sigma^2 e^u with sigma^2 fixed by the parameters,
    H = -eps sqrt(-c) (1/c + 2 alpha/(k^2 omega)), G = eps sqrt(-1/c), Q = 0.
    """
    spec.validate_family()
    sig2 = hyp_c1_sigma_squared(spec)
    if sigma is not None and not np.isclose(sigma ** 2, sig2, rtol=1e-12, atol=1e-15):
        raise ConstraintViolation("sigma-consistency",
                                  f"sigma^2 = {sigma**2} but parameters give {sig2}")
    f, fprime = _f_pair(f, fprime)
    u = liouville_u(grid, f, fprime, np.sqrt(sig2))
    w = Field.constant(grid, omega_poly(spec))
    alpha = spec.alpha.real
    sqc = np.sqrt(-spec.c)
    if alpha == 0.0:
        H = Field.constant(grid, -spec.eps * sqc / spec.c)
    else:
        # 1/omega needs a nonzero theta-free part
        H = (-spec.eps * sqc) * ((1.0 / spec.c) + (2.0 * alpha / spec.k ** 2) * w.reciprocal())
    G = Field.constant(grid, spec.eps * np.sqrt(-1.0 / spec.c))
    return GeometryBundle(spec, grid, {"u": u, "omega": w, "H": H, "G": G})


def hyp_case2_derived(spec, phi, psi):
    """Geometric quantities of the curved case 2 from the metric pair.

    D = -1/c - e^{-phi} d1 psi d2 psi must be strictly positive (the
    case's inequality constraint); then
      Q    = eps (d1 phi d1 psi - d1^2 psi - (d1 psi)^2/2) / (2 sqrt(D)),
      H    = -eps (1/c + e^{-phi}(d1 d2 psi + d1 psi d2 psi/2)) / sqrt(D),
      G    = eps sqrt(D).
    The identity 1/c + G^2 + e^{-phi} d1 psi d2 psi = 0 holds by
    construction. The factor 2 in Q's denominator is required for
    consistency with the frame equations (see the case catalog).
    """
    grid = phi.grid
    c, eps = spec.c, spec.eps
    Em = (-phi).exp()
    p1, p2 = d_x(psi, 1), d_x(psi, 2)
    margin = (-1.0 / c) - (Em * (p1 * p2))
    mbody = margin.body().real
    if mbody.min() <= 0.0:
        idx = tuple(int(v) for v in np.unravel_index(int(np.argmin(mbody)), mbody.shape))
        raise ConstraintViolation(
            "psi-gradient-bound",
            f"d1 psi d2 psi < -e^phi/c fails (margin {mbody.min():.3e})", idx)
    sqrtD = margin.sqrt()
    inv_sqrtD = sqrtD.reciprocal()
    f1 = d_x(phi, 1)
    f2 = d_x(phi, 2)
    Q = (0.5 * eps) * (f1 * p1 - d_x(p1, 1) - 0.5 * (p1 * p1)) * inv_sqrtD
    Qb = (0.5 * eps) * (f2 * p2 - d_x(p2, 2) - 0.5 * (p2 * p2)) * inv_sqrtD
    H = (-eps) * ((1.0 / c) + Em * (d_x(p1, 2) + 0.5 * (p1 * p2))) * inv_sqrtD
    G = eps * sqrtD
    return GeometryBundle(spec, grid, {"phi": phi, "psi": psi, "Q": Q,
                                       "Q_conj": Qb, "H": H, "G": G})


def hyp_case2_family(spec, grid, f=None, fprime=None, psi0=0.0):
    """Constant-psi subfamily: phi solves the reduced metric equation,
    which for constant psi is d1 d2 phi = e^phi / c."""
    f, fprime = _f_pair(f, fprime)
    phi = conformal_factor(grid, f, fprime, 1.0 / spec.c)
    psi = Field.constant(grid, psi0)
    return hyp_case2_derived(spec, phi, psi)


# ---------------------------------------------------------------------------
# Structural-equation suites (denominator-cleared).
# ---------------------------------------------------------------------------

def _suite_report(case, grid, named, tol_max, tol_l2):
    """Build a report from (name, cleared residual, clearing factor) triples.

    Each residual is the source equation multiplied by its clearing factor,
    so it is rescaled by max(1, |factor|) before tolerance comparison; this
    keeps the h^2 tolerances meaningful independent of field magnitudes.
    """
    report = ResidualReport(case, grid, tol_max=tol_max, tol_l2=tol_l2)
    nvals = grid.n ** 2
    for name, f, factor in named:
        scale = 1.0 if factor is None else max(1.0, factor.max_abs())
        report.entries.extend(_sector_entries(0, 0, name, [f * (1.0 / scale)], nvals))
    return report


def _exp_pair(phi, psi, exp_phi, exp_psi):
    if exp_phi is None:
        if phi is None:
            raise ValueError("supply phi or exp_phi")
        exp_phi = phi.exp()
    if exp_psi is None:
        if psi is None:
            raise ValueError("supply psi or exp_psi")
        exp_psi = psi.exp()
    return exp_phi, exp_psi


def appendix_a_residuals(phi=None, psi=None, Q=None, H=None, *,
                         exp_phi=None, exp_psi=None,
                         tol_max=None, tol_l2=None, case="euc-f3"):
    """Full structural-equation suite of the flat two-odd-variable type.

    Equations are evaluated in cleared form with E = e^phi, S = e^psi;
    each entry name carries the equation it renders.
    """
    E, S = _exp_pair(phi, psi, exp_phi, exp_psi)
    grid = E.grid
    Qb = Q.conj()
    E1, E2 = d_x(E, 1), d_x(E, 2)
    E3, E4 = d_theta(E, 3), d_theta(E, 4)
    S1, S2 = d_x(S, 1), d_x(S, 2)
    S3, S4 = d_theta(S, 3), d_theta(S, 4)
    EE = E * E
    ES = E * S
    EES = EE * S
    named = [
        ("gauss", S * (E * d_x(E1, 2) - E1 * E2) + 0.5 * (EE * E) * S * (H * H)
         - 2.0 * ES * (Q * Qb) + 0.5 * E * (E3 * E4), EES),
        ("codazzi_q", d_x(Q, 2) - 0.5 * E * d_x(H, 1), None),
        ("codazzi_qbar", d_x(Qb, 1) - 0.5 * E * d_x(H, 2), None),
        ("mixed_phi_13", E * d_theta(E1, 3) - E1 * E3, EE),
        ("mixed_phi_14", E * d_theta(E1, 4) - E1 * E4, EE),
        ("mixed_phi_23", E * d_theta(E2, 3) - E2 * E3, EE),
        ("mixed_phi_24", E * d_theta(E2, 4) - E2 * E4, EE),
        ("psi_slope_product", S1 * S2, S * S),
        ("phi_psi_33", E3 * S3, ES),
        ("phi_psi_34", E3 * S4, ES),
        ("phi_psi_43", E4 * S3, ES),
        ("phi_psi_44", E4 * S4, ES),
        ("theta2_phi_3", 2.0 * E * d_theta(E3, 3) - E3 * E3, EE),
        ("theta2_phi_4", 2.0 * E * d_theta(E4, 4) - E4 * E4, EE),
        ("theta_mixed_phi", 2.0 * E * d_theta(E3, 4) - E3 * E4, EE),
        ("theta_q_3", E * d_theta(Q, 3) - 0.5 * Q * E3, E),
        ("theta_q_4", E * d_theta(Q, 4) - 0.5 * Q * E4, E),
        ("theta_qbar_3", E * d_theta(Qb, 3) - 0.5 * Qb * E3, E),
        ("theta_qbar_4", E * d_theta(Qb, 4) - 0.5 * Qb * E4, E),
        ("theta_h_3", E * d_theta(H, 3) + 0.5 * H * E3, E),
        ("theta_h_4", E * d_theta(H, 4) + 0.5 * H * E4, E),
        ("nilpotency_phi_3", d_theta(d_theta(E3, 3), 3), None),
        ("nilpotency_phi_4", d_theta(d_theta(E4, 4), 4), None),
        ("nilpotency_psi_3", d_theta(S3, 3), None),
        ("nilpotency_psi_4", d_theta(S4, 4), None),
    ]
    return _suite_report(case, grid, named, tol_max, tol_l2)


def appendix_b_residuals(phi=None, psi=None, Q=None, H=None, G=None, c=None, *,
                         exp_phi=None, exp_psi=None,
                         tol_max=None, tol_l2=None, case="hyp-f3"):
    """Full structural-equation suite of the curved two-odd-variable type.

    c < 0 is required. Cleared forms as in the flat suite; the curvature
    term of the first equation carries the metric factor e^phi (its source
    rendering drops it, which fails on the solved family)."""
    if c is None or c >= 0:
        raise ValueError("the curved suite needs c < 0")
    E, S = _exp_pair(phi, psi, exp_phi, exp_psi)
    grid = E.grid
    Qb = Q.conj()
    E1, E2 = d_x(E, 1), d_x(E, 2)
    E3, E4 = d_theta(E, 3), d_theta(E, 4)
    S1, S2 = d_x(S, 1), d_x(S, 2)
    S3, S4 = d_theta(S, 3), d_theta(S, 4)
    EE = E * E
    ES = E * S
    ESS = ES * S
    named = [
        ("gauss", S * (E * d_x(E1, 2) - E1 * E2)
         + 0.5 * (EE * E) * S * (H * H + 1.0 / c)
         - 2.0 * ES * (Q * Qb) + 0.5 * E * (E3 * E4), EE * S),
        ("codazzi_q", d_x(Q, 2) - 0.5 * E * d_x(H, 1), None),
        ("codazzi_qbar", d_x(Qb, 1) - 0.5 * E * d_x(H, 2), None),
        ("theta_q_3", E * d_theta(Q, 3) - 0.5 * Q * E3, E),
        ("theta_q_4", E * d_theta(Q, 4) - 0.5 * Q * E4, E),
        ("theta_qbar_3", E * d_theta(Qb, 3) - 0.5 * Qb * E3, E),
        ("theta_qbar_4", E * d_theta(Qb, 4) - 0.5 * Qb * E4, E),
        ("theta_h_3", E * d_theta(H, 3) + 0.5 * ((H - G) * E3), E),
        ("theta_h_4", E * d_theta(H, 4) + 0.5 * ((H - G) * E4), E),
        ("g_x_1", ES * d_x(G, 1) + 0.5 * ((G - H) * (E * S1)) - Q * S2, ES),
        ("g_x_2", ES * d_x(G, 2) + 0.5 * ((G - H) * (E * S2)) - Qb * S1, ES),
        ("g_identity", ESS * (G * G + 1.0 / c) + S1 * S2, ESS),
        ("theta_psi_3", S3, None),
        ("theta_psi_4", S4, None),
        ("theta_g_3", d_theta(G, 3), None),
        ("theta_g_4", d_theta(G, 4), None),
        ("gh_identity", EE * (S * S) * (G * H + 1.0 / c)
         + S * (E * d_theta(E3, 4) - 0.5 * (E3 * E4))
         + E * (S * d_x(S1, 2) - 0.5 * (S1 * S2)), EE * (S * S)),
        ("psi_phi_13", S1 * E3, ES),
        ("psi_phi_14", S1 * E4, ES),
        ("psi_phi_23", S2 * E3, ES),
        ("psi_phi_24", S2 * E4, ES),
        ("mixed_phi_13", E * d_theta(E1, 3) - E1 * E3, EE),
        ("mixed_phi_14", E * d_theta(E1, 4) - E1 * E4, EE),
        ("mixed_phi_23", E * d_theta(E2, 3) - E2 * E3, EE),
        ("mixed_phi_24", E * d_theta(E2, 4) - E2 * E4, EE),
        ("psi_x2_1", 2.0 * ES * d_x(S1, 1) - E * (S1 * S1)
         - 2.0 * S * (E1 * S1) + 4.0 * (G * Q) * ESS, ESS),
        ("psi_x2_2", 2.0 * ES * d_x(S2, 2) - E * (S2 * S2)
         - 2.0 * S * (E2 * S2) + 4.0 * (G * Qb) * ESS, ESS),
        ("theta2_phi_3", 2.0 * E * d_theta(E3, 3) - E3 * E3, EE),
        ("theta2_phi_4", 2.0 * E * d_theta(E4, 4) - E4 * E4, EE),
        ("nilpotency_phi_3", d_theta(d_theta(E3, 3), 3), None),
        ("nilpotency_phi_4", d_theta(d_theta(E4, 4), 4), None),
    ]
    return _suite_report(case, grid, named, tol_max, tol_l2)


# ---------------------------------------------------------------------------
# Bundle adapters for the suites.
# ---------------------------------------------------------------------------

def euc_f3_exp_fields(bundle):
    """(exp_phi, exp_psi, Q, H) for the flat f3 bundles."""
    spec, grid = bundle.spec, bundle.grid
    if spec.tag == "euc-f3-c1":
        w = Field.constant(grid, omega_poly(spec))
        exp_phi = bundle["u"].exp() * w * w
        exp_psi = Field.constant(grid, spec.k ** 2)
        Q = bundle["q"] * w
        H = bundle["h"] * w.reciprocal()
        return exp_phi, exp_psi, Q, H
    if spec.tag == "euc-f3-c2":
        exp_phi = bundle["u"].exp()
        exp_psi = Field.constant(grid, omega_poly(spec))
        return exp_phi, exp_psi, bundle["Q"], bundle["H"]
    raise ValueError(f"not a flat f3 bundle: {spec.tag}")


def appendix_a_for_bundle(bundle, tol_max=None, tol_l2=None):
    exp_phi, exp_psi, Q, H = euc_f3_exp_fields(bundle)
    return appendix_a_residuals(Q=Q, H=H, exp_phi=exp_phi, exp_psi=exp_psi,
                                tol_max=tol_max, tol_l2=tol_l2, case=bundle.spec.tag)


def hyp_f3_exp_fields(bundle):
    """(exp_phi, exp_psi, Q, H, G) for the curved f3 bundles."""
    spec, grid = bundle.spec, bundle.grid
    if spec.tag == "hyp-f3-c1":
        w = bundle.fields.get("omega") or Field.constant(grid, omega_poly(spec))
        exp_phi = bundle["u"].exp() * w * w
        exp_psi = Field.constant(grid, spec.k ** 2)
        Q = bundle.fields.get("Q") or Field.zero(grid)
        return exp_phi, exp_psi, Q, bundle["H"], bundle["G"]
    if spec.tag == "hyp-f3-c2":
        return (bundle["phi"].exp(), bundle["psi"].exp(),
                bundle["Q"], bundle["H"], bundle["G"])
    raise ValueError(f"not a curved f3 bundle: {spec.tag}")


def appendix_b_for_bundle(bundle, tol_max=None, tol_l2=None):
    exp_phi, exp_psi, Q, H, G = hyp_f3_exp_fields(bundle)
    return appendix_b_residuals(Q=Q, H=H, G=G, c=bundle.spec.c,
                                exp_phi=exp_phi, exp_psi=exp_psi,
                                tol_max=tol_max, tol_l2=tol_l2, case=bundle.spec.tag)


# ---------------------------------------------------------------------------
# Curved one-odd-variable type: delegates to the curved body case.
# ---------------------------------------------------------------------------

def curved_f2_residual(spec, geom, tol_max=None, tol_l2=None):
    """Verification of the curved one-odd-variable type.

    The curved frame relations force this type to be odd-free, so its
    verification is exactly the curved body verification on the same
    (u, Q, H); the report is the curved body report."""
    body_spec = CaseSpec("cur-f0", c=spec.c, eps=spec.eps)
    return gauss_codazzi_residual(body_spec, geom, tol_max=tol_max, tol_l2=tol_l2)
