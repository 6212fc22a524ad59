"""Exact arithmetic in the Grassmann algebra on three generators.

Values carry all 8 basis monomials (subsets of {xi1, xi2, xi3}) even though
the supermanifold decomposition only populates the even ones; the odd slots
keep the algebra closed under multiplication and catch construction bugs.
The generator count is a module constant; only n = 3 is exercised.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from superframes.fields import tp_dtheta, tp_trim

N_GENERATORS = 3
DIM = 1 << N_GENERATORS

# Even monomials carrying the four component manifolds, keyed by the sector
# index used throughout: value = V0 + V3 xi1xi2 + V2 xi1xi3 + V1 xi2xi3.
SECTOR_MASKS = {0: 0b000, 3: 0b011, 2: 0b101, 1: 0b110}


def _merge_sign(a_mask, b_mask):
    """Sign from sorting the concatenation of two ordered generator sets."""
    if a_mask & b_mask:
        return 0
    swaps = 0
    for i in range(N_GENERATORS):
        if b_mask & (1 << i):
            swaps += bin(a_mask >> (i + 1)).count("1")
    return -1 if swaps % 2 else 1


_SIGN_TABLE = [[_merge_sign(a, b) for b in range(DIM)] for a in range(DIM)]


class GrassmannValue:
    """Element of the algebra generated by xi1, xi2, xi3."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        arr = np.zeros(DIM, dtype=np.complex128)
        if coeffs is not None:
            if isinstance(coeffs, dict):
                for mask, v in coeffs.items():
                    arr[mask] = v
            else:
                arr[:] = coeffs
        self.coeffs = arr

    @classmethod
    def scalar(cls, v):
        return cls({0: v})

    @classmethod
    def generator(cls, i):
        if not 1 <= i <= N_GENERATORS:
            raise ValueError(f"generator index out of range: {i}")
        return cls({1 << (i - 1): 1.0})

    @property
    def body(self):
        return self.coeffs[0]

    def grade(self, k):
        """Projection onto monomials of degree k."""
        out = GrassmannValue()
        for mask in range(DIM):
            if bin(mask).count("1") == k:
                out.coeffs[mask] = self.coeffs[mask]
        return out

    def is_homogeneous(self):
        degs = {bin(m).count("1") for m in range(DIM) if self.coeffs[m] != 0}
        return len(degs) <= 1

    def degree(self):
        degs = [bin(m).count("1") for m in range(DIM) if self.coeffs[m] != 0]
        return degs[0] if degs else 0

    def __add__(self, other):
        other = _as_grassmann(other)
        return GrassmannValue(self.coeffs + other.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannValue(-self.coeffs)

    def __sub__(self, other):
        return self + (-_as_grassmann(other))

    def __rsub__(self, other):
        return _as_grassmann(other) + (-self)

    def __mul__(self, other):
        other = _as_grassmann(other)
        out = np.zeros(DIM, dtype=np.complex128)
        for a in range(DIM):
            ca = self.coeffs[a]
            if ca == 0:
                continue
            for b in range(DIM):
                cb = other.coeffs[b]
                if cb == 0:
                    continue
                sign = _SIGN_TABLE[a][b]
                if sign:
                    out[a ^ b] += sign * ca * cb
        return GrassmannValue(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return bool(np.array_equal(self.coeffs, _as_grassmann(other).coeffs))

    def __repr__(self):
        names = {0: "1"}
        for m in range(1, DIM):
            names[m] = "".join(f"xi{i+1}" for i in range(N_GENERATORS) if m & (1 << i))
        terms = [f"{self.coeffs[m]:g}*{names[m]}" for m in range(DIM) if self.coeffs[m] != 0]
        return "GrassmannValue(" + (" + ".join(terms) if terms else "0") + ")"


def _as_grassmann(x):
    if isinstance(x, GrassmannValue):
        return x
    return GrassmannValue.scalar(x)


XI1, XI2, XI3 = (GrassmannValue.generator(i) for i in (1, 2, 3))


def gr_mul(a, b):
    """Product in the Grassmann algebra (ordered-merge sign rule)."""
    return _as_grassmann(a) * _as_grassmann(b)


# ---------------------------------------------------------------------------
# Super vectors and the sector-wise inner product.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SectorSignature:
    """Flat (Euclidean) or curved (signed) scalar product per sector.

    In curved mode each sector vector carries an extra 0-th coordinate and
    the product is sgn(c_i) A_0 B_0 + sum_j A_j B_j; c_i > 0 is spherical,
    c_i < 0 hyperbolic.
    """

    mode: str = "flat"
    cs: tuple = (1.0, 1.0, 1.0, 1.0)

    def __post_init__(self):
        if self.mode not in ("flat", "curved"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "curved" and any(c == 0 for c in self.cs):
            raise ValueError("curved mode requires nonzero sector constants")

    def sector_product(self, i, a, b):
        a = np.asarray(a, dtype=np.complex128)
        b = np.asarray(b, dtype=np.complex128)
        if a.shape != b.shape:
            raise ValueError(f"sector {i} dimension mismatch: {a.shape} vs {b.shape}")
        if self.mode == "flat":
            return np.sum(a * b)
        return np.sign(self.cs[i]) * a[0] * b[0] + np.sum(a[1:] * b[1:])


FLAT_SIGNATURE = SectorSignature()


class SuperVector:
    """V0 + V3 xi1xi2 + V2 xi1xi3 + V1 xi2xi3 with vector-valued sectors."""

    __slots__ = ("v0", "v1", "v2", "v3")

    def __init__(self, v0, v1=None, v2=None, v3=None):
        self.v0 = np.asarray(v0, dtype=np.complex128)
        self.v1 = np.zeros_like(self.v0) if v1 is None else np.asarray(v1, dtype=np.complex128)
        self.v2 = np.zeros_like(self.v0) if v2 is None else np.asarray(v2, dtype=np.complex128)
        self.v3 = np.zeros_like(self.v0) if v3 is None else np.asarray(v3, dtype=np.complex128)

    def sector(self, i):
        return (self.v0, self.v1, self.v2, self.v3)[i]


def super_inner(a, b, sig=FLAT_SIGNATURE):
    """Sector-wise inner product, returning a Grassmann value.

    <A|B> = <A0,B0> + <A3,B3> xi1xi2 + <A2,B2> xi1xi3 + <A1,B1> xi2xi3.
    """
    out = GrassmannValue()
    for i, mask in SECTOR_MASKS.items():
        out.coeffs[mask] = sig.sector_product(i, a.sector(i), b.sector(i))
    return out


# ---------------------------------------------------------------------------
# Decomposition of a supermanifold-valued sample into component manifolds.
# ---------------------------------------------------------------------------

class NilpotencyViolation(ValueError):
    """A component is quadratic (or worse) in a single theta variable."""

    def __init__(self, sector, variable, magnitude):
        self.sector = sector
        self.variable = variable
        self.magnitude = magnitude
        super().__init__(
            f"sector F{sector}: component not affine in theta{variable} "
            f"(worst coefficient {magnitude:.3e})")


class DependencyViolation(ValueError):
    """A component depends on a theta variable it must not."""

    def __init__(self, sector, variable, magnitude):
        self.sector = sector
        self.variable = variable
        self.magnitude = magnitude
        super().__init__(
            f"sector F{sector}: unexpected theta{variable} dependence "
            f"(worst coefficient {magnitude:.3e})")


@dataclass(frozen=True)
class SuperVectorField:
    """Sampled supermanifold value over a grid.

    Sector i holds an array of shape (n, n, N_i, p, q): vector components
    with theta-polynomial entries. Sector 0 is the body map.
    """

    grid: object
    v0: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    v3: np.ndarray

    def sector(self, i):
        return (self.v0, self.v1, self.v2, self.v3)[i]


def _max_from(arr, axis, order):
    p, q = arr.shape[-2:]
    if axis == 3:
        return float(np.abs(arr[..., order:, :]).max()) if p > order else 0.0
    return float(np.abs(arr[..., :, order:]).max()) if q > order else 0.0


def decompose(svf):
    """Split into the four component maps, verifying their theta structure.

    F0 = F0(x1, x2); F2 = F2(x1, x2, theta3); F1 = F1(x1, x2, theta4);
    F3 may depend on everything; every component is affine in each theta.
    """
    comps = {}
    for i in range(4):
        arr = tp_trim(np.asarray(svf.sector(i), dtype=np.complex128))
        for var in (3, 4):
            bad = _max_from(arr, var, 2)
            if bad:
                raise NilpotencyViolation(i, var, bad)
        if i == 0:
            for var in (3, 4):
                bad = _max_from(arr, var, 1)
                if bad:
                    raise DependencyViolation(0, var, bad)
        if i == 2:
            bad = _max_from(arr, 4, 1)
            if bad:
                raise DependencyViolation(2, 4, bad)
        if i == 1:
            bad = _max_from(arr, 3, 1)
            if bad:
                raise DependencyViolation(1, 3, bad)
        for var in (3, 4):
            # affine components: the second exact derivative must vanish
            assert not tp_dtheta(tp_dtheta(arr, var), var).any()
        comps[i] = arr
    return comps[0], comps[1], comps[2], comps[3]


def reassemble(grid, f0, f1, f2, f3):
    """Inverse of decompose (decompose o reassemble is the identity)."""
    return SuperVectorField(grid, np.asarray(f0, dtype=np.complex128),
                            np.asarray(f1, dtype=np.complex128),
                            np.asarray(f2, dtype=np.complex128),
                            np.asarray(f3, dtype=np.complex128))
