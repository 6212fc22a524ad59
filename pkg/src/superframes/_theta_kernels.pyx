# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for truncated theta-polynomial arithmetic.

Coefficient layout: value[..., m, n] multiplies theta3^m * theta4^n.
Products are truncated to the caller-supplied output degree bounds.
"""

import numpy as np

cimport numpy as cnp


def conv_mul(cnp.complex128_t[:, :, ::1] a, cnp.complex128_t[:, :, ::1] b,
             int p_out, int q_out):
    """Batched truncated product: (N,pa,qa) x (N,pb,qb) -> (N,p_out,q_out)."""
    cdef Py_ssize_t N = a.shape[0]
    cdef Py_ssize_t pa = a.shape[1], qa = a.shape[2]
    cdef Py_ssize_t pb = b.shape[1], qb = b.shape[2]
    if b.shape[0] != N:
        raise ValueError("batch size mismatch")
    out_np = np.zeros((N, p_out, q_out), dtype=np.complex128)
    cdef cnp.complex128_t[:, :, ::1] out = out_np
    cdef Py_ssize_t n, i, j, k, l, kmax, lmax
    cdef cnp.complex128_t aij
    with nogil:
        for n in range(N):
            for i in range(pa):
                if i >= p_out:
                    break
                kmax = pb if pb < p_out - i else p_out - i
                for j in range(qa):
                    if j >= q_out:
                        break
                    aij = a[n, i, j]
                    if aij == 0:
                        continue
                    lmax = qb if qb < q_out - j else q_out - j
                    for k in range(kmax):
                        for l in range(lmax):
                            out[n, i + k, j + l] = out[n, i + k, j + l] + aij * b[n, k, l]
    return out_np


def conv_matmul(cnp.complex128_t[:, :, :, :, ::1] a,
                cnp.complex128_t[:, :, :, :, ::1] b,
                int p_out, int q_out):
    """Batched matrix product with theta truncation.

    (N,r,m,pa,qa) x (N,m,c,pb,qb) -> (N,r,c,p_out,q_out)
    """
    cdef Py_ssize_t N = a.shape[0]
    cdef Py_ssize_t r = a.shape[1], m = a.shape[2]
    cdef Py_ssize_t pa = a.shape[3], qa = a.shape[4]
    cdef Py_ssize_t c = b.shape[2]
    cdef Py_ssize_t pb = b.shape[3], qb = b.shape[4]
    if b.shape[0] != N or b.shape[1] != m:
        raise ValueError("shape mismatch")
    out_np = np.zeros((N, r, c, p_out, q_out), dtype=np.complex128)
    cdef cnp.complex128_t[:, :, :, :, ::1] out = out_np
    cdef Py_ssize_t n, ri, ci, mi, i, j, k, l, kmax, lmax
    cdef cnp.complex128_t aij
    with nogil:
        for n in range(N):
            for ri in range(r):
                for ci in range(c):
                    for mi in range(m):
                        for i in range(pa):
                            if i >= p_out:
                                break
                            kmax = pb if pb < p_out - i else p_out - i
                            for j in range(qa):
                                if j >= q_out:
                                    break
                                aij = a[n, ri, mi, i, j]
                                if aij == 0:
                                    continue
                                lmax = qb if qb < q_out - j else q_out - j
                                for k in range(kmax):
                                    for l in range(lmax):
                                        out[n, ri, ci, i + k, j + l] = (
                                            out[n, ri, ci, i + k, j + l]
                                            + aij * b[n, mi, ci, k, l])
    return out_np
