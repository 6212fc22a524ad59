import numpy as np
import pytest

from superframes import _theta_kernels_py as pyk
from superframes import kernels


def brute_conv_mul(a, b, p_out, q_out):
    N, pa, qa = a.shape
    _, pb, qb = b.shape
    out = np.zeros((N, p_out, q_out), dtype=complex)
    for n in range(N):
        for i in range(pa):
            for j in range(qa):
                for k in range(pb):
                    for l in range(qb):
                        if i + k < p_out and j + l < q_out:
                            out[n, i + k, j + l] += a[n, i, j] * b[n, k, l]
    return out


@pytest.mark.parametrize("shape_a,shape_b,out", [
    ((7, 1, 1), (7, 1, 1), (1, 1)),
    ((7, 3, 2), (7, 2, 3), (4, 4)),
    ((7, 5, 5), (7, 5, 5), (5, 5)),
    ((7, 3, 3), (7, 3, 3), (2, 2)),
])
def test_conv_mul_matches_bruteforce(shape_a, shape_b, out):
    rng = np.random.default_rng(0)
    a = rng.normal(size=shape_a) + 1j * rng.normal(size=shape_a)
    b = rng.normal(size=shape_b) + 1j * rng.normal(size=shape_b)
    got = kernels.conv_mul(a, b, *out)
    assert np.allclose(got, brute_conv_mul(a, b, *out), atol=1e-13)


def test_conv_matmul_matches_python_fallback():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(11, 4, 3, 2, 3)) + 1j * rng.normal(size=(11, 4, 3, 2, 3))
    b = rng.normal(size=(11, 3, 5, 3, 2)) + 1j * rng.normal(size=(11, 3, 5, 3, 2))
    got = kernels.conv_matmul(a, b, 4, 4)
    ref = pyk.conv_matmul(a, b, 4, 4)
    assert got.shape == (11, 4, 5, 4, 4)
    assert np.allclose(got, ref, atol=1e-13)


def test_conv_matmul_theta_free_is_plain_matmul():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(5, 3, 3, 1, 1)) + 0j
    b = rng.normal(size=(5, 3, 3, 1, 1)) + 0j
    got = kernels.conv_matmul(a, b, 1, 1)[..., 0, 0]
    ref = np.matmul(a[..., 0, 0], b[..., 0, 0])
    assert np.allclose(got, ref, atol=1e-13)


def test_backend_reported():
    assert kernels.BACKEND in ("compiled", "python")
