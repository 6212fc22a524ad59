import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superframes.fields import ConformalGrid
from superframes.grassmann import (DIM, XI1, XI2, XI3, DependencyViolation,
                                   GrassmannValue, NilpotencyViolation,
                                   SectorSignature, SuperVector, SuperVectorField,
                                   decompose, gr_mul, reassemble, super_inner)


def gv(d):
    return GrassmannValue(d)


def test_generator_product():
    assert XI1 * XI2 == gv({0b011: 1})


def test_anticommutation():
    assert XI2 * XI1 == gv({0b011: -1})
    for a, b in [(XI1, XI2), (XI1, XI3), (XI2, XI3)]:
        assert a * b + b * a == gv({})


def test_nilpotency_kills_repeated_generator():
    # (1 + 2 xi1xi2)(3 + xi2xi3): the xi1xi2*xi2xi3 term vanishes
    lhs = (gv({0: 1, 0b011: 2})) * (gv({0: 3, 0b110: 1}))
    assert lhs == gv({0: 3, 0b011: 6, 0b110: 1})
    for g in (XI1, XI2, XI3):
        assert g * g == gv({})


ints = st.integers(min_value=-5, max_value=5)
coeff = st.builds(complex, ints, ints)
grassmann_values = st.builds(
    lambda cs: GrassmannValue(np.array(cs, dtype=complex)),
    st.lists(coeff, min_size=DIM, max_size=DIM))


@settings(max_examples=200, deadline=None)
@given(grassmann_values, grassmann_values, grassmann_values)
def test_associativity_exact(a, b, c):
    assert (a * b) * c == a * (b * c)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 3), st.integers(0, 3), grassmann_values, grassmann_values)
def test_graded_anticommutation(da, db, a, b):
    ah, bh = a.grade(da), b.grade(db)
    sign = (-1) ** (da * db)
    assert ah * bh - sign * (bh * ah) == gv({})


@settings(max_examples=200, deadline=None)
@given(grassmann_values, grassmann_values)
def test_body_homomorphism(a, b):
    assert (a * b).body == a.body * b.body


def test_distributivity():
    rng = np.random.default_rng(7)
    for _ in range(50):
        a, b, c = (GrassmannValue(rng.integers(-4, 5, DIM).astype(complex))
                   for _ in range(3))
        assert a * (b + c) == a * b + a * c


# -- super inner product ------------------------------------------------------

def unit(n, j=0):
    v = np.zeros(n)
    v[j] = 1.0
    return v


def test_super_inner_unit_vectors_flat():
    A = SuperVector(unit(3), unit(2), unit(2), unit(3))
    out = super_inner(A, A)
    assert out == gv({0: 1, 0b011: 1, 0b101: 1, 0b110: 1})


def test_super_inner_orthogonal():
    A = SuperVector(unit(3, 0), unit(3, 0), unit(3, 0), unit(3, 0))
    B = SuperVector(unit(3, 1), unit(3, 1), unit(3, 1), unit(3, 1))
    assert super_inner(A, B) == gv({})


def test_super_inner_curved_signed():
    sig = SectorSignature("curved", (-1.0, -1.0, -1.0, -1.0))
    e0 = unit(4, 0)
    A = SuperVector(e0, e0, e0, e0)
    out = super_inner(A, A, sig)
    assert out == gv({0: -1, 0b011: -1, 0b101: -1, 0b110: -1})


def test_super_inner_bilinear_symmetric_flat():
    rng = np.random.default_rng(3)
    for _ in range(20):
        A = SuperVector(*(rng.normal(size=3) + 1j * rng.normal(size=3) for _ in range(4)))
        B = SuperVector(*(rng.normal(size=3) + 1j * rng.normal(size=3) for _ in range(4)))
        C = SuperVector(*(rng.normal(size=3) + 1j * rng.normal(size=3) for _ in range(4)))
        ab = super_inner(A, B)
        ba = super_inner(B, A)
        assert np.allclose(ab.coeffs, ba.coeffs)
        lin = super_inner(SuperVector(*(2 * A.sector(i) + C.sector(i) for i in range(4))), B)
        expect = 2 * ab.coeffs + super_inner(C, B).coeffs
        assert np.allclose(lin.coeffs, expect)


def test_super_inner_dimension_mismatch():
    A = SuperVector(unit(3), unit(2), unit(2), unit(3))
    B = SuperVector(unit(4), unit(2), unit(2), unit(3))
    with pytest.raises(ValueError, match="dimension mismatch"):
        super_inner(A, B)


# -- decomposition ------------------------------------------------------------

def _grid(n=7):
    return ConformalGrid(0, 1.0, n)


def _svf(grid, v0=None, v1=None, v2=None, v3=None, dims=(3, 3, 3, 3)):
    n = grid.n
    sectors = []
    for i, v in enumerate((v0, v1, v2, v3)):
        if v is None:
            v = np.zeros((n, n, dims[i], 1, 1), dtype=complex)
        sectors.append(v)
    return SuperVectorField(grid, *sectors)


def test_decompose_body_only():
    grid = _grid()
    v0 = np.zeros((grid.n, grid.n, 3, 1, 1), dtype=complex)
    v0[..., 0, 0, 0] = grid.x1
    f0, f1, f2, f3 = decompose(_svf(grid, v0=v0))
    assert np.array_equal(f0[..., 0, 0, 0], grid.x1)
    assert not f1.any() and not f2.any() and not f3.any()


def test_decompose_f2_linear_in_theta3():
    grid = _grid()
    a, b = 2.0, 1.0
    v2 = np.zeros((grid.n, grid.n, 3, 2, 1), dtype=complex)
    v2[..., 0, 0, 0] = b
    v2[..., 0, 1, 0] = a
    f0, f1, f2, f3 = decompose(_svf(grid, v2=v2))
    assert f2.shape[-2] == 2 and f2.shape[-1] == 1
    assert np.allclose(f2[..., 0, 1, 0], a)


def test_decompose_nilpotency_error_names_sector():
    grid = _grid()
    v3 = np.zeros((grid.n, grid.n, 3, 3, 1), dtype=complex)
    v3[..., 0, 2, 0] = 1.0  # theta3^2 term
    with pytest.raises(NilpotencyViolation, match="F3") as err:
        decompose(_svf(grid, v3=v3))
    assert err.value.sector == 3


def test_decompose_dependency_error():
    grid = _grid()
    v2 = np.zeros((grid.n, grid.n, 3, 1, 2), dtype=complex)
    v2[..., 0, 0, 1] = 1.0  # theta4 dependence in the theta3-only sector
    with pytest.raises(DependencyViolation, match="F2"):
        decompose(_svf(grid, v2=v2))


def test_decompose_reassemble_roundtrip():
    rng = np.random.default_rng(11)
    grid = _grid()
    n = grid.n
    v0 = rng.normal(size=(n, n, 3, 1, 1)) + 0j
    v1 = rng.normal(size=(n, n, 2, 1, 2)) + 0j
    v2 = rng.normal(size=(n, n, 2, 2, 1)) + 0j
    v3 = rng.normal(size=(n, n, 4, 2, 2)) + 0j
    svf = reassemble(grid, v0, v1, v2, v3)
    f0, f1, f2, f3 = decompose(svf)
    again = reassemble(grid, f0, f1, f2, f3)
    for i in range(4):
        assert np.array_equal(svf.sector(i), again.sector(i))
