"""NumPy fallback for the compiled theta kernels.

Same contracts as ``_theta_kernels``: coefficient arrays are complex128,
value[..., m, n] multiplies theta3^m * theta4^n, products truncated to the
requested output degree bounds.
"""

import numpy as np


def conv_mul(a, b, p_out, q_out):
    """Batched truncated product: (N,pa,qa) x (N,pb,qb) -> (N,p_out,q_out)."""
    N, pa, qa = a.shape
    _, pb, qb = b.shape
    out = np.zeros((N, p_out, q_out), dtype=np.complex128)
    for i in range(min(pa, p_out)):
        kmax = min(pb, p_out - i)
        for j in range(min(qa, q_out)):
            lmax = min(qb, q_out - j)
            out[:, i:i + kmax, j:j + lmax] += a[:, i, j, None, None] * b[:, :kmax, :lmax]
    return out


def conv_matmul(a, b, p_out, q_out):
    """Batched matrix product with theta truncation.

    (N,r,m,pa,qa) x (N,m,c,pb,qb) -> (N,r,c,p_out,q_out)
    """
    N, r, m, pa, qa = a.shape
    _, _, c, pb, qb = b.shape
    out = np.zeros((N, r, c, p_out, q_out), dtype=np.complex128)
    for i in range(min(pa, p_out)):
        kmax = min(pb, p_out - i)
        for j in range(min(qa, q_out)):
            lmax = min(qb, q_out - j)
            for k in range(kmax):
                for l in range(lmax):
                    # (N,r,m) @ (N,m,c) batched over the grid axis
                    out[:, :, :, i + k, j + l] += np.matmul(a[:, :, :, i, j], b[:, :, :, k, l])
    return out
