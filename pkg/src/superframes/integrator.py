"""Frame transport over the grid, holonomy measurement, and reconstruction.

The frame Omega (rows: tangent vectors, normal, and for curved cases the
position vector) is propagated across the x-grid with the classical
fourth-order one-step scheme applied to d Omega = A Omega along grid
lines; theta directions are handled exactly by polynomial recursion.
Ambient inner products are bilinear (no conjugation), with the signed
0-th coordinate in curved cases.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from superframes import kernels
from superframes.casedefs import omega_poly
from superframes.fields import THETA_DIM, Field, ThetaPoly, d_x, tp_mul, tp_pad, tp_trim
from superframes.frames import zero_curvature_residual


# ---------------------------------------------------------------------------
# Dense theta-matrix helpers. Arrays are (..., d, d, p, q); the theta axes
# may be absent (theta-free fast path uses plain (..., d, d)).
# ---------------------------------------------------------------------------

# Convention: every matrix array carries trailing theta axes,
# shape (..., d, d, p, q), with p = q = 1 in the theta-free case.

def _is_theta_free(arr):
    return arr.shape[-2:] == (1, 1)


def _mm(a, b):
    if _is_theta_free(a) and _is_theta_free(b):
        return np.matmul(a[..., 0, 0], b[..., 0, 0])[..., None, None]
    batch = a.shape[:-4]
    n = int(np.prod(batch)) if batch else 1
    d, e = a.shape[-4], a.shape[-3]
    f = b.shape[-3]
    pa, qa = a.shape[-2:]
    pb, qb = b.shape[-2:]
    p = min(pa + pb - 1, THETA_DIM)
    q = min(qa + qb - 1, THETA_DIM)
    flat = kernels.conv_matmul(a.reshape((n, d, e, pa, qa)),
                               b.reshape((n, e, f, pb, qb)), p, q)
    return flat.reshape(batch + (d, f, p, q))


def _add(a, b):
    p = max(a.shape[-2], b.shape[-2])
    q = max(a.shape[-1], b.shape[-1])
    return tp_pad(a, p, q) + tp_pad(b, p, q)


def _eye_like(arr):
    eye = np.zeros_like(arr)
    idx = np.arange(arr.shape[-3])
    eye[..., idx, idx, 0, 0] = 1.0
    return eye


def _inv(mat):
    """Inverse of (..., d, d, p, q) matrices (Neumann series on the soul)."""
    body = mat[..., 0, 0]
    binv = np.linalg.inv(body)[..., None, None]
    if _is_theta_free(mat):
        return binv
    soul = mat.copy()
    soul[..., 0, 0] = 0
    # N = -binv @ soul; inverse = (sum N^k) @ binv
    N = -_mm(binv, soul)
    acc = _eye_like(mat)
    term = acc
    for _ in range(2 * (THETA_DIM - 1)):
        term = _mm(term, N)
        if not term.any():
            break
        acc = _add(acc, term)
    return _mm(acc, binv)


# ---------------------------------------------------------------------------
# Initial frames.
# ---------------------------------------------------------------------------

def ambient_signature(spec, dim):
    sig = np.ones(dim)
    if spec.tag in ("cur-f0", "hyp-f3-c1", "hyp-f3-c2"):
        sig[0] = np.sign(spec.c)
    return sig


def _center_poly(f, grid):
    ic, jc = grid.center_index
    return ThetaPoly(f.values[ic, jc])


def initial_frame(spec, geom):
    """Frame at the grid center satisfying the case's algebraic relations.

    Rows follow the case's frame ordering; ambient columns equal the row
    count. Entries are ThetaPoly coefficient blocks, returned as a dense
    (d, d, p, q) array.
    """
    tag = spec.tag
    some = next(iter(geom.values()))
    grid = some.grid

    def place(rows, d):
        p = max(c.coeffs.shape[0] for row in rows for c in row)
        q = max(c.coeffs.shape[1] for row in rows for c in row)
        out = np.zeros((d, d, p, q), dtype=np.complex128)
        for r in range(d):
            for cidx in range(d):
                coeffs = rows[r][cidx].coeffs
                out[r, cidx, :coeffs.shape[0], :coeffs.shape[1]] = coeffs
        return tp_trim(out)

    P = lambda v: ThetaPoly([[v]]) if not isinstance(v, ThetaPoly) else v
    zero = P(0.0)

    if tag in ("euc-f0", "cur-f0"):
        u0 = _center_poly(geom["u"], grid)
        A = (0.5 * u0).exp() * 0.5
        if tag == "euc-f0":
            rows = [[A, -1j * A, zero], [A, 1j * A, zero], [zero, zero, P(1.0)]]
            return place(rows, 3)
        r0 = np.sqrt(abs(spec.c))
        rows = [[zero, A, -1j * A, zero],
                [zero, A, 1j * A, zero],
                [zero, zero, zero, P(1.0)],
                [P(r0), zero, zero, zero]]
        return place(rows, 4)

    if tag == "euc-f2":
        u0 = _center_poly(geom["u"], grid)
        W = omega_poly(spec)
        B = (0.5 * u0).exp() * W * 0.5
        rows = [[B, -1j * B, zero, zero],
                [B, 1j * B, zero, zero],
                [zero, zero, P(spec.k), zero],
                [zero, zero, zero, P(1.0)]]
        return place(rows, 4)

    if tag in ("euc-f3-c1", "euc-f3-c2"):
        u0 = _center_poly(geom["u"], grid)
        w = omega_poly(spec)
        if tag == "euc-f3-c1":
            B = (0.5 * u0).exp() * w * 0.5
            C = P(0.5 * spec.k)
        else:
            B = (0.5 * u0).exp() * 0.5
            C = w.sqrt() * 0.5
        rows = [[B, -1j * B, zero, zero, zero],
                [B, 1j * B, zero, zero, zero],
                [zero, zero, C, -1j * C, zero],
                [zero, zero, C, 1j * C, zero],
                [zero, zero, zero, zero, P(1.0)]]
        return place(rows, 5)

    if tag in ("hyp-f3-c1", "hyp-f3-c2"):
        if tag == "hyp-f3-c1":
            u0 = _center_poly(geom["u"], grid)
            w = geom["omega"] if "omega" in geom else None
            wp = _center_poly(w, grid) if w is not None else omega_poly(spec)
            B = (0.5 * u0).exp() * wp * 0.5
            C = P(0.5 * spec.k)
        else:
            B = (0.5 * _center_poly(geom["phi"], grid)).exp() * 0.5
            C = (0.5 * _center_poly(geom["psi"], grid)).exp() * 0.5
        r0 = np.sqrt(abs(spec.c))
        rows = [[zero, B, -1j * B, zero, zero, zero],
                [zero, B, 1j * B, zero, zero, zero],
                [zero, zero, zero, C, -1j * C, zero],
                [zero, zero, zero, C, 1j * C, zero],
                [zero, zero, zero, zero, zero, P(1.0)],
                [P(r0), zero, zero, zero, zero, zero]]
        return place(rows, 6)

    raise ValueError(f"unknown case {tag}")


def expected_relations(spec, geom, grid, dim):
    """Expected bilinear products of frame rows: (n, n, d, d[, p, q])."""
    from superframes.cases import metric

    g = metric(spec, geom)
    m = len(g)
    p = max(f.theta_shape[0] for row in g for f in row)
    q = max(f.theta_shape[1] for row in g for f in row)
    out = np.zeros((grid.n, grid.n, dim, dim, p, q), dtype=np.complex128)
    for i in range(m):
        for j in range(m):
            out[:, :, i, j] = tp_pad(g[i][j].values, p, q)
    out[:, :, m, m, 0, 0] = 1.0  # unit normal
    if spec.tag in ("cur-f0", "hyp-f3-c1", "hyp-f3-c2"):
        out[:, :, m + 1, m + 1, 0, 0] = spec.c
    return tp_trim(out)


def frame_relations(omega, spec):
    """Bilinear products Omega Sig Omega^T of a frame array (..., d, d, p, q)."""
    dim = omega.shape[-4]
    sig = ambient_signature(spec, dim)
    scaled = omega * sig[:, None, None]
    return _mm(omega, np.swapaxes(scaled, -4, -3))


# ---------------------------------------------------------------------------
# Propagation.
# ---------------------------------------------------------------------------

@dataclass
class FrameField:
    """Transported frame over the grid: values (n, n, d, d[, p, q])."""

    spec: object
    grid: object
    values: np.ndarray

    @property
    def dim(self):
        return self.values.shape[2]


def _direction_matrices(fs):
    """A_s = U1 + U2 and A_t = i (U1 - U2) as dense arrays."""
    U1 = fs.matrix(1).to_dense()
    U2 = fs.matrix(2).to_dense()
    p = max(U1.shape[-2], U2.shape[-2])
    q = max(U1.shape[-1], U2.shape[-1])
    U1 = tp_pad(U1, p, q)
    U2 = tp_pad(U2, p, q)
    As = tp_trim(U1 + U2)
    At = tp_trim(1j * (U1 - U2))
    return As, At


def _rk4_step(A0, A1, omega, dt):
    Am = 0.5 * _add(A0, A1)
    k1 = _mm(A0, omega)
    k2 = _mm(Am, _add(omega, (0.5 * dt) * k1))
    k3 = _mm(Am, _add(omega, (0.5 * dt) * k2))
    k4 = _mm(A1, _add(omega, dt * k3))
    incr = _add(_add(k1, 2.0 * k2), _add(2.0 * k3, k4))
    return _add(omega, (dt / 6.0) * incr)


def _march_line(A_line, omega_start, start, dt):
    """March along one axis of a stacked line of nodes.

    A_line: (L, ..., d, d[, p, q]) direction matrices along the line;
    omega_start: frame at index ``start``. Returns (L, ...) frames.
    """
    L = A_line.shape[0]
    out = [None] * L
    out[start] = omega_start
    for k in range(start, L - 1):
        out[k + 1] = _rk4_step(A_line[k], A_line[k + 1], out[k], dt)
    for k in range(start, 0, -1):
        out[k - 1] = _rk4_step(A_line[k], A_line[k - 1], out[k], -dt)
    return np.stack(out)


def propagate(fs, omega0=None, geom=None, order="s-first", check_compatibility=True):
    """Transport the frame from the grid center across the whole grid.

    ``omega0`` defaults to the case's canonical center frame (requires
    ``geom``). Sweeps the center line of one axis, then all lines of the
    other axis in parallel.
    """
    if check_compatibility:
        rep = zero_curvature_residual(fs)
        if not rep.passed:
            warnings.warn(f"frame system fails compatibility (max residual "
                          f"{rep.overall_max:.3e}); transport may not be path-independent")
    if omega0 is None:
        if geom is None:
            raise ValueError("need geom to build the default initial frame")
        omega0 = initial_frame(fs.spec, geom)
    grid = fs.grid
    h = grid.h
    ic, jc = grid.center_index
    As, At = _direction_matrices(fs)
    if order == "s-first":
        center_line = _march_line(As[:, jc], omega0, ic, h)  # along axis 0
        values = _march_line(np.swapaxes(At, 0, 1), center_line, jc, h)
        values = np.swapaxes(values, 0, 1)
    elif order == "t-first":
        center_line = _march_line(At[ic, :], omega0, jc, h)
        values = _march_line(As, center_line, ic, h)
    else:
        raise ValueError("order must be 's-first' or 't-first'")
    return FrameField(fs.spec, grid, values)


def theta_transport(fs, omega, k):
    """Exact theta-direction transport: solves d_k Omega = U_k Omega.

    Returns the frame with its theta_k dependence extended from the
    theta_k = 0 slice of ``omega`` by polynomial recursion.
    """
    U = fs.matrix(k).to_dense()
    p = THETA_DIM if k == 3 else max(U.shape[-2], omega.shape[-2])
    q = THETA_DIM if k == 4 else max(U.shape[-1], omega.shape[-1])
    om = tp_pad(omega, p, q)
    U = tp_pad(U, p, q)
    # zero out existing theta_k dependence, then rebuild coefficient by
    # coefficient: (m+1) Omega_{m+1} = sum_{i+j=m} U_i Omega_j
    om = om.copy()
    if k == 3:
        om[..., 1:, :] = 0
    else:
        om[..., :, 1:] = 0
    cap = p if k == 3 else q
    for m in range(cap - 1):
        # coefficient m of U @ Omega only involves Omega coefficients <= m,
        # which are already final; recompute the product and read it off
        prod = _mm(U, om)
        prod = tp_pad(prod, p, q)
        if k == 3:
            om[..., m + 1, :] = prod[..., m, :] / (m + 1)
        else:
            om[..., :, m + 1] = prod[..., :, m] / (m + 1)
    return tp_trim(om)


# ---------------------------------------------------------------------------
# Holonomy.
# ---------------------------------------------------------------------------

@dataclass
class HolonomyReport:
    max: float
    mean: float
    deviations: np.ndarray = field(repr=False, default=None)
    order: float = None

    def to_json(self):
        doc = {"holonomy_max": self.max, "holonomy_mean": self.mean}
        if self.order is not None:
            doc["order"] = self.order
        return doc


def _edge_transports(A, dt, axis):
    """One-step transport operators along an axis for every edge."""
    if axis == 0:
        A0, A1 = A[:-1, :], A[1:, :]
    else:
        A0, A1 = A[:, :-1], A[:, 1:]
    return _rk4_step(A0, A1, _eye_like(A0), dt)


def holonomy(fs):
    """Deviation from identity of transport around every grid plaquette."""
    As, At = _direction_matrices(fs)
    h = fs.grid.h
    Ts = _edge_transports(As, h, axis=0)   # (n-1, n, ...)
    Tt = _edge_transports(At, h, axis=1)   # (n, n-1, ...)
    # loop (i,j) -> (i+1,j) -> (i+1,j+1) -> (i,j+1) -> (i,j)
    P = _mm(_inv(Tt[:-1, :]), _mm(_inv(Ts[:, 1:]), _mm(Tt[1:, :], Ts[:, :-1])))
    dev = np.abs(P - _eye_like(P)).max(axis=tuple(range(2, P.ndim)))
    return HolonomyReport(float(dev.max()), float(dev.mean()), dev)


def holonomy_order(fs_coarse, fs_fine):
    """Empirical convergence order from two resolutions of one domain."""
    hc = holonomy(fs_coarse)
    hf = holonomy(fs_fine)
    order = float(np.log2(hc.max / hf.max))
    return HolonomyReport(hf.max, hf.mean, hf.deviations, order=order)


# ---------------------------------------------------------------------------
# Reconstruction.
# ---------------------------------------------------------------------------

def _trapezoid_line(g_line, start, dh):
    """Cumulative trapezoid along axis 0 from index ``start`` (value 0)."""
    L = g_line.shape[0]
    out = np.zeros_like(g_line)
    for k in range(start, L - 1):
        out[k + 1] = out[k] + (0.5 * dh) * (g_line[k] + g_line[k + 1])
    for k in range(start, 0, -1):
        out[k - 1] = out[k] - (0.5 * dh) * (g_line[k] + g_line[k - 1])
    return out


def _path_integrate(gs, gt, grid, order):
    ic, jc = grid.center_index
    h = grid.h
    if order == "s-first":
        line = _trapezoid_line(gs[:, jc], ic, h)  # F on center column
        F = _trapezoid_line(np.swapaxes(gt, 0, 1), jc, h)
        F = np.swapaxes(F, 0, 1) + line[:, None]
    else:
        line = _trapezoid_line(gt[ic, :], jc, h)
        F = _trapezoid_line(gs, ic, h) + line[None, :]
    return F


def reconstruct(frame_field, geom, tol_max=None):
    """Recover the immersion map from the transported frame.

    Flat cases integrate the x-tangent rows (path-independence checked);
    curved cases read the position row directly. Returns (F, report):
    F has shape (n, n, ambient[, p, q]) and the report collects metric
    recovery and invariant drift measures.
    """
    spec = frame_field.spec
    grid = frame_field.grid
    om = frame_field.values
    curved = spec.tag in ("cur-f0", "hyp-f3-c1", "hyp-f3-c2")
    h = grid.h
    tol = tol_max if tol_max is not None else 100.0 * h * h
    report = {}

    if curved:
        F = om[:, :, -1]
        path_dep = 0.0
    else:
        row1, row2 = om[:, :, 0], om[:, :, 1]
        gs = row1 + row2
        gt = 1j * (row1 - row2)
        F = _path_integrate(gs, gt, grid, "s-first")
        F_alt = _path_integrate(gs, gt, grid, "t-first")
        path_dep = float(np.abs(F - F_alt).max())
    report["path_independence"] = path_dep

    # metric recovery from finite differences of the reconstructed map
    sig = ambient_signature(spec, frame_field.dim)
    Fb = F[..., 0, 0]
    dsF = np.stack([_fd(Fb[..., a], h, 0) for a in range(Fb.shape[-1])], axis=-1)
    dtF = np.stack([_fd(Fb[..., a], h, 1) for a in range(Fb.shape[-1])], axis=-1)
    d1F = 0.5 * (dsF - 1j * dtF)
    d2F = 0.5 * (dsF + 1j * dtF)
    g12 = np.einsum("ija,ija,a->ij", d1F, d2F, sig)
    u = geom.get("u") or geom.get("phi")
    expected = 0.5 * np.exp(u.body())
    report["metric_recovery_max"] = float(np.abs(g12 - expected).max())

    # frame relation drift along the transported frame
    rel = frame_relations(om, spec)
    exp_rel = expected_relations(spec, geom, grid, frame_field.dim)
    p = max(rel.shape[-2], exp_rel.shape[-2])
    q = max(rel.shape[-1], exp_rel.shape[-1])
    drift = np.abs(tp_pad(rel, p, q) - tp_pad(exp_rel, p, q)).max()
    report["relation_drift"] = float(drift)

    if curved:
        FF = np.einsum("ija,ija,a->ij", Fb, Fb, sig)
        report["position_norm_drift"] = float(np.abs(FF - spec.c).max())

    report["pass"] = report["relation_drift"] <= tol and path_dep <= tol
    report["tolerance"] = tol
    return F, report


def _fd(values, h, axis):
    v = np.moveaxis(values, axis, 0)
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return np.moveaxis(out, 0, axis)
