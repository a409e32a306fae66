"""Naive reference implementations used as independent test oracles.

Everything here loops over explicit index tuples and never calls into the
package's reshaping or contraction code.
"""

import itertools

import numpy as np


def loop_einstein(a, b, n):
    p = a.ndim - n
    free_a = a.shape[:p]
    common = a.shape[p:]
    free_b = b.shape[n:]
    out = np.zeros(free_a + free_b, dtype=np.result_type(a, b))
    for ia in itertools.product(*map(range, free_a)):
        for ib in itertools.product(*map(range, free_b)):
            s = 0
            for k in itertools.product(*map(range, common)):
                s += a[ia + k] * b[k + ib]
            out[ia + ib] = s
    return out


def loop_contracted(a, b, modes_a, modes_b):
    free_a = [m for m in range(a.ndim) if m not in modes_a]
    free_b = [m for m in range(b.ndim) if m not in modes_b]
    sizes = [a.shape[m] for m in modes_a]
    out = np.zeros(
        tuple(a.shape[m] for m in free_a) + tuple(b.shape[m] for m in free_b),
        dtype=np.result_type(a, b),
    )
    for ia in itertools.product(*(range(a.shape[m]) for m in free_a)):
        for ib in itertools.product(*(range(b.shape[m]) for m in free_b)):
            s = 0
            for k in itertools.product(*map(range, sizes)):
                idx_a = [0] * a.ndim
                idx_b = [0] * b.ndim
                for m, v in zip(free_a, ia):
                    idx_a[m] = v
                for m, v in zip(modes_a, k):
                    idx_a[m] = v
                for m, v in zip(free_b, ib):
                    idx_b[m] = v
                for m, v in zip(modes_b, k):
                    idx_b[m] = v
                s += a[tuple(idx_a)] * b[tuple(idx_b)]
            out[ia + ib] = s
    return out


def loop_mode_n(t, u, n):
    shape = list(t.shape)
    shape[n] = u.shape[0]
    out = np.zeros(shape, dtype=np.result_type(t, u))
    for idx in itertools.product(*map(range, shape)):
        s = 0
        for i in range(t.shape[n]):
            src = list(idx)
            src[n] = i
            s += t[tuple(src)] * u[idx[n], i]
        out[idx] = s
    return out


def loop_outer(a, b):
    out = np.zeros(a.shape + b.shape, dtype=np.result_type(a, b))
    for ia in itertools.product(*map(range, a.shape)):
        for ib in itertools.product(*map(range, b.shape)):
            out[ia + ib] = a[ia] * b[ib]
    return out


def eq1_position(idx, dims_row, dims_col):
    """Row/column of a tensor entry under the first-index-fastest mapping (0-based)."""
    n = len(dims_row)
    row, stride = 0, 1
    for i, d in zip(idx[:n], dims_row):
        row += i * stride
        stride *= d
    col, stride = 0, 1
    for j, d in zip(idx[n:], dims_col):
        col += j * stride
        stride *= d
    return row, col


def loop_matricize(t, n_row):
    dims_row, dims_col = t.shape[:n_row], t.shape[n_row:]
    out = np.zeros((int(np.prod(dims_row)), int(np.prod(dims_col))), dtype=t.dtype)
    for idx in itertools.product(*map(range, t.shape)):
        out[eq1_position(idx, dims_row, dims_col)] = t[idx]
    return out


def crandn(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
