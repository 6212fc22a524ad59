"""Backend selection for the theta-polynomial hot kernels.

The compiled Cython extension is preferred when it built; otherwise the
NumPy implementation is used. Both expose identical contracts, and
``benchmarks/bench_kernels.py`` compares them.
"""

import numpy as np

try:
    from superframes import _theta_kernels as _impl

    BACKEND = "compiled"
except ImportError:  # extension not built on this install
    from superframes import _theta_kernels_py as _impl

    BACKEND = "python"


def conv_mul(a, b, p_out, q_out):
    a = np.ascontiguousarray(a, dtype=np.complex128)
    b = np.ascontiguousarray(b, dtype=np.complex128)
    return _impl.conv_mul(a, b, p_out, q_out)


def conv_matmul(a, b, p_out, q_out):
    a = np.ascontiguousarray(a, dtype=np.complex128)
    b = np.ascontiguousarray(b, dtype=np.complex128)
    return _impl.conv_matmul(a, b, p_out, q_out)
