"""Theta-polynomial valued fields over a conformal complex grid.

A value is a polynomial in the two scalar odd-descendant variables
(theta3, theta4) with complex coefficients, stored as an array whose last
two axes index the theta3 / theta4 degree. The geometric quantities of
interest are bounded by degree 2 in each variable; internally degrees up
to ``THETA_DIM - 1`` are carried so that reciprocal/log/exp series stay
exact in every reported sector even after taking theta derivatives twice.

x-differentiation is numeric (second-order central differences combined
into Wirtinger derivatives); theta-differentiation is exact on the stored
coefficients. Fields are immutable after construction and safe to share.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from superframes import kernels

# Stored theta degrees run 0 .. THETA_DIM-1 in each variable. Degree <= 2
# is the contract for geometric quantities; the extra headroom keeps the
# contract sectors of truncated series exact under up to two theta
# derivatives (each derivative consumes one stored degree).
THETA_DIM = 5

# Sectors reported by residual checks (the contract degrees).
REPORT_DEGREE = 2


class BodyVanishesError(ZeroDivisionError):
    """Division/log/sqrt of a value whose theta-free part vanishes somewhere."""

    def __init__(self, op, min_abs, node=None):
        self.op = op
        self.min_abs = min_abs
        self.node = node
        loc = f" at node {node}" if node is not None else ""
        super().__init__(f"{op}: theta-free part vanishes{loc} (min |body| = {min_abs:.3e})")


# ---------------------------------------------------------------------------
# Raw coefficient helpers. Arrays have shape (..., p, q) with arbitrary
# (broadcast-compatible) leading dims; p, q <= THETA_DIM.
# ---------------------------------------------------------------------------

def tp_trim(values):
    """Drop trailing all-zero degree planes (always keeps degree 0)."""
    p, q = values.shape[-2:]
    while p > 1 and not values[..., p - 1, :].any():
        p -= 1
    while q > 1 and not values[..., :, q - 1].any():
        q -= 1
    if (p, q) != values.shape[-2:]:
        values = values[..., :p, :q]
    return values


def tp_pad(values, p, q):
    pa, qa = values.shape[-2:]
    if (pa, qa) == (p, q):
        return values
    out = np.zeros(values.shape[:-2] + (p, q), dtype=np.complex128)
    out[..., :pa, :qa] = values
    return out


def tp_add(a, b):
    pa, qa = a.shape[-2:]
    pb, qb = b.shape[-2:]
    p, q = max(pa, pb), max(qa, qb)
    return tp_pad(a, p, q) + tp_pad(b, p, q)


def _mul_slices(a, b, p, q):
    out = np.zeros(np.broadcast_shapes(a.shape[:-2], b.shape[:-2]) + (p, q),
                   dtype=np.complex128)
    pa, qa = a.shape[-2:]
    pb, qb = b.shape[-2:]
    for i in range(min(pa, p)):
        kmax = min(pb, p - i)
        for j in range(min(qa, q)):
            lmax = min(qb, q - j)
            out[..., i:i + kmax, j:j + lmax] += a[..., i, j, None, None] * b[..., :kmax, :lmax]
    return out


def tp_mul(a, b):
    """Truncated product; exact in every retained sector."""
    pa, qa = a.shape[-2:]
    pb, qb = b.shape[-2:]
    p = min(pa + pb - 1, THETA_DIM)
    q = min(qa + qb - 1, THETA_DIM)
    if (pa, qa) == (1, 1) or (pb, qb) == (1, 1):
        return a * b if (pa, qa) == (1, 1) == (pb, qb) else _mul_slices(a, b, p, q)
    if a.shape == b.shape and a.ndim >= 3 and a[..., 0, 0].size >= 256:
        batch = a.shape[:-2]
        n = int(np.prod(batch))
        flat = kernels.conv_mul(a.reshape(n, pa, qa), b.reshape(n, pb, qb), p, q)
        return flat.reshape(batch + (p, q))
    return _mul_slices(a, b, p, q)


def tp_dtheta(values, k):
    """Exact formal derivative w.r.t. theta3 (k=3) or theta4 (k=4)."""
    p, q = values.shape[-2:]
    if k == 3:
        if p == 1:
            return np.zeros(values.shape[:-2] + (1, q), dtype=np.complex128)
        m = np.arange(1, p).reshape((p - 1, 1))
        return values[..., 1:, :] * m
    if k == 4:
        if q == 1:
            return np.zeros(values.shape[:-2] + (p, 1), dtype=np.complex128)
        n = np.arange(1, q).reshape((1, q - 1))
        return values[..., :, 1:] * n
    raise ValueError(f"theta index must be 3 or 4, got {k}")


def _soul_series(values, coeff_fn, op):
    """Evaluate sum_k coeff_fn(k) * soul^k for the nilpotent (truncated) soul."""
    body = values[..., 0, 0]
    soul = values.copy()
    soul[..., 0, 0] = 0
    soul = tp_trim(soul)
    acc = np.zeros(values.shape[:-2] + (1, 1), dtype=np.complex128)
    acc[..., 0, 0] = coeff_fn(0)
    term = None
    for k in range(1, 2 * (THETA_DIM - 1) + 1):
        term = soul if k == 1 else tp_trim(tp_mul(term, soul))
        if not term.any():
            break
        acc = tp_add(acc, coeff_fn(k) * term)
    return acc, body


def tp_exp(values):
    acc, body = _soul_series(values, lambda k: 1.0 / math.factorial(k), "exp")
    return np.exp(body)[..., None, None] * acc


def tp_reciprocal(values, min_body=1e-12, op="reciprocal"):
    body = values[..., 0, 0]
    small = np.abs(body)
    if small.min() < min_body:
        idx = tuple(int(v) for v in np.unravel_index(int(np.argmin(small)), small.shape)) if small.ndim else None
        raise BodyVanishesError(op, float(small.min()), idx)
    scaled = values / body[..., None, None]
    acc, _ = _soul_series(scaled, lambda k: (-1.0) ** k, op)
    return acc / body[..., None, None]


def tp_log(values, min_body=1e-12):
    body = values[..., 0, 0]
    small = np.abs(body)
    if small.min() < min_body:
        idx = tuple(int(v) for v in np.unravel_index(int(np.argmin(small)), small.shape)) if small.ndim else None
        raise BodyVanishesError("log", float(small.min()), idx)
    scaled = values / body[..., None, None]
    acc, _ = _soul_series(scaled, lambda k: 0.0 if k == 0 else -((-1.0) ** k) / k, "log")
    acc[..., 0, 0] += np.log(body.astype(np.complex128))
    return acc


def tp_power(values, t, min_body=1e-12):
    """values**t for real t, via the binomial series on the soul."""
    body = values[..., 0, 0]
    small = np.abs(body)
    if small.min() < min_body:
        idx = tuple(int(v) for v in np.unravel_index(int(np.argmin(small)), small.shape)) if small.ndim else None
        raise BodyVanishesError(f"power({t})", float(small.min()), idx)
    scaled = values / body[..., None, None]

    def binom(k):
        out = 1.0
        for i in range(k):
            out *= (t - i) / (i + 1)
        return out

    acc, _ = _soul_series(scaled, binom, "power")
    return (body.astype(np.complex128) ** t)[..., None, None] * acc


def tp_conj(values):
    """Complex conjugation; swaps theta3 and theta4 (theta3 = conj(theta4))."""
    return np.conj(np.swapaxes(values, -1, -2))


# ---------------------------------------------------------------------------
# ThetaPoly: a single polynomial value (grid-free).
# ---------------------------------------------------------------------------

class ThetaPoly:
    """Polynomial in theta3, theta4 with complex coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        arr = np.atleast_2d(np.asarray(coeffs, dtype=np.complex128))
        self.coeffs = tp_trim(arr)

    @classmethod
    def from_terms(cls, terms):
        """Build from {(m, n): coefficient}."""
        p = max(m for m, _ in terms) + 1
        q = max(n for _, n in terms) + 1
        arr = np.zeros((p, q), dtype=np.complex128)
        for (m, n), v in terms.items():
            arr[m, n] = v
        return cls(arr)

    @property
    def body(self):
        return self.coeffs[0, 0]

    def __add__(self, other):
        other = _as_poly(other)
        return ThetaPoly(tp_add(self.coeffs, other.coeffs))

    __radd__ = __add__

    def __neg__(self):
        return ThetaPoly(-self.coeffs)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) + (-self)

    def __mul__(self, other):
        other = _as_poly(other)
        return ThetaPoly(tp_mul(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * _as_poly(other).reciprocal()

    def reciprocal(self):
        return ThetaPoly(tp_reciprocal(self.coeffs))

    def exp(self):
        return ThetaPoly(tp_exp(self.coeffs))

    def log(self):
        return ThetaPoly(tp_log(self.coeffs))

    def sqrt(self):
        return ThetaPoly(tp_power(self.coeffs, 0.5))

    def conj(self):
        return ThetaPoly(tp_conj(self.coeffs))

    def dtheta(self, k):
        return ThetaPoly(tp_dtheta(self.coeffs, k))

    def coeff(self, m, n):
        p, q = self.coeffs.shape
        return self.coeffs[m, n] if m < p and n < q else 0j

    def __eq__(self, other):
        other = _as_poly(other)
        p = max(self.coeffs.shape[0], other.coeffs.shape[0])
        q = max(self.coeffs.shape[1], other.coeffs.shape[1])
        return bool(np.array_equal(tp_pad(self.coeffs, p, q), tp_pad(other.coeffs, p, q)))

    def __repr__(self):
        terms = []
        p, q = self.coeffs.shape
        for m in range(p):
            for n in range(q):
                v = self.coeffs[m, n]
                if v != 0:
                    mono = "".join(["t3^%d" % m if m else "", "t4^%d" % n if n else ""])
                    terms.append(f"{v:g}{'*' + mono if mono else ''}")
        return "ThetaPoly(" + (" + ".join(terms) if terms else "0") + ")"


def _as_poly(x):
    if isinstance(x, ThetaPoly):
        return x
    if np.isscalar(x) or isinstance(x, (complex, float, int)):
        return ThetaPoly([[x]])
    return ThetaPoly(x)


THETA3 = ThetaPoly.from_terms({(1, 0): 1.0})
THETA4 = ThetaPoly.from_terms({(0, 1): 1.0})


# ---------------------------------------------------------------------------
# Conformal grid: x1 = s + i t, x2 = conj(x1) node-wise.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConformalGrid:
    """Square grid of conformal coordinates x1 = s + i t, x2 = s - i t."""

    center: complex = 0j
    half_width: float = 1.0
    n: int = 201

    def __post_init__(self):
        if self.n < 5:
            raise ValueError("grid needs at least 5 points per direction")

    @property
    def h(self):
        return 2.0 * self.half_width / (self.n - 1)

    @property
    def s(self):
        return self.center.real + np.linspace(-self.half_width, self.half_width, self.n)

    @property
    def t(self):
        return self.center.imag + np.linspace(-self.half_width, self.half_width, self.n)

    @property
    def x1(self):
        return self.s[:, None] + 1j * self.t[None, :]

    @property
    def x2(self):
        return np.conj(self.x1)

    @property
    def center_index(self):
        return (self.n // 2, self.n // 2)

    def to_json(self):
        return {"center": [self.center.real, self.center.imag],
                "half_width": self.half_width, "n": self.n, "h": self.h}


# ---------------------------------------------------------------------------
# Field: one theta-polynomial per grid node.
# ---------------------------------------------------------------------------

class Field:
    """Grid of theta-polynomial values. Immutable by convention."""

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=np.complex128)
        if values.ndim == 2:
            values = values[:, :, None, None]
        if values.shape[:2] != (grid.n, grid.n) or values.ndim != 4:
            raise ValueError(f"bad field shape {values.shape} for n={grid.n}")
        self.grid = grid
        self.values = tp_trim(values)

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, grid, value):
        coeffs = _as_poly(value).coeffs
        arr = np.broadcast_to(coeffs, (grid.n, grid.n) + coeffs.shape).copy()
        return cls(grid, arr)

    @classmethod
    def from_x(cls, grid, fn):
        """Theta-free field from a callable of (x1, x2)."""
        return cls(grid, np.asarray(fn(grid.x1, grid.x2), dtype=np.complex128))

    @classmethod
    def zero(cls, grid):
        return cls(grid, np.zeros((grid.n, grid.n, 1, 1)))

    # -- basic accessors ---------------------------------------------------
    @property
    def theta_shape(self):
        return self.values.shape[2:]

    @property
    def is_theta_free(self):
        return self.theta_shape == (1, 1)

    def body(self):
        return self.values[:, :, 0, 0]

    def sector(self, m, n):
        p, q = self.theta_shape
        if m < p and n < q:
            return self.values[:, :, m, n]
        return np.zeros((self.grid.n, self.grid.n), dtype=np.complex128)

    def max_abs(self):
        return float(np.abs(self.values).max())

    def is_real(self, tol=1e-12):
        """Real-valued: conjugation (value conj + theta swap) is the identity."""
        return float(np.abs(self.values - tp_conj(self.values)).max()) <= tol

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.values
        return _as_poly(other).coeffs

    def __add__(self, other):
        return Field(self.grid, tp_add(self.values, self._coerce(other)))

    __radd__ = __add__

    def __neg__(self):
        return Field(self.grid, -self.values)

    def __sub__(self, other):
        return Field(self.grid, tp_add(self.values, -self._coerce(other)))

    def __rsub__(self, other):
        return Field(self.grid, tp_add(self._coerce(other), -self.values))

    def __mul__(self, other):
        return Field(self.grid, tp_mul(self.values, self._coerce(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Field) or isinstance(other, ThetaPoly):
            return self * _field_reciprocal(self.grid, self._coerce(other))
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def conj(self):
        return Field(self.grid, tp_conj(self.values))

    def reciprocal(self, min_body=1e-12):
        return Field(self.grid, tp_reciprocal(self.values, min_body))

    def exp(self):
        return Field(self.grid, tp_exp(self.values))

    def log(self, min_body=1e-12):
        return Field(self.grid, tp_log(self.values, min_body))

    def sqrt(self, min_body=1e-12):
        return Field(self.grid, tp_power(self.values, 0.5, min_body))

    def __repr__(self):
        return (f"Field(n={self.grid.n}, theta_shape={self.theta_shape}, "
                f"max|.|={self.max_abs():.4g})")


def _field_reciprocal(grid, values):
    return Field(grid, tp_reciprocal(values))


# ---------------------------------------------------------------------------
# Derivatives.
# ---------------------------------------------------------------------------

def _diff_axis(values, h, axis):
    """Second-order first derivative along a grid axis.

    Interior: central. Edges: the one-sided 4-point stencil whose error
    expansion matches the central one (-h^2/6 f''' + O(h^4)), so composed
    (mixed) derivatives keep second-order accuracy up to the boundary.
    """
    v = np.moveaxis(values, axis, 0)
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    out[0] = (-4.0 * v[0] + 7.0 * v[1] - 4.0 * v[2] + v[3]) / (2.0 * h)
    out[-1] = (4.0 * v[-1] - 7.0 * v[-2] + 4.0 * v[-3] - v[-4]) / (2.0 * h)
    return np.moveaxis(out, 0, axis)


def d_x(f, k):
    """Wirtinger derivative d/dx1 (k=1) or d/dx2 (k=2) by central differences."""
    if k not in (1, 2):
        raise ValueError(f"x index must be 1 or 2, got {k}")
    h = f.grid.h
    ds = _diff_axis(f.values, h, 0)
    dt = _diff_axis(f.values, h, 1)
    if k == 1:
        return Field(f.grid, 0.5 * (ds - 1j * dt))
    return Field(f.grid, 0.5 * (ds + 1j * dt))


def d_theta(f, k):
    """Exact derivative in theta3 (k=3) or theta4 (k=4)."""
    return Field(f.grid, tp_dtheta(f.values, k))


def check_nilpotency(f, order3, order4):
    """Report the worst coefficient violating d3^order3 f = d4^order4 f = 0."""
    p, q = f.theta_shape
    viol3 = float(np.abs(f.values[:, :, order3:, :]).max()) if p > order3 else 0.0
    viol4 = float(np.abs(f.values[:, :, :, order4:]).max()) if q > order4 else 0.0
    return {"order3": order3, "order4": order4,
            "violation3": viol3, "violation4": viol4,
            "pass": max(viol3, viol4) == 0.0}


# ---------------------------------------------------------------------------
# CSV export/import: columns s, t, then c{m}{n}_re, c{m}{n}_im per monomial.
# ---------------------------------------------------------------------------

def field_to_csv(f, path):
    p, q = f.theta_shape
    header = ["s", "t"]
    for m in range(p):
        for n in range(q):
            header += [f"c{m}{n}_re", f"c{m}{n}_im"]
    s, t = f.grid.s, f.grid.t
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(f.grid.n):
            for j in range(f.grid.n):
                row = [repr(float(s[i])), repr(float(t[j]))]
                for m in range(p):
                    for n in range(q):
                        v = f.values[i, j, m, n]
                        row += [repr(float(v.real)), repr(float(v.imag))]
                w.writerow(row)


def field_from_csv(grid, path):
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        mono = [(int(name[1]), int(name[2])) for name in header[2::2]]
        p = max(m for m, _ in mono) + 1
        q = max(n for _, n in mono) + 1
        values = np.zeros((grid.n, grid.n, p, q), dtype=np.complex128)
        for idx, row in enumerate(r):
            i, j = divmod(idx, grid.n)
            data = [float(x) for x in row[2:]]
            for col, (m, n) in enumerate(mono):
                values[i, j, m, n] = complex(data[2 * col], data[2 * col + 1])
    return Field(grid, values)
