"""Dense complex tensors and the multilinear algebra built on the Einstein product.

Tensors are plain :class:`numpy.ndarray` objects. Whenever a tensor is
flattened or matricized the *first* index varies fastest (column-major, numpy
``order="F"``), so that for an order-(N+M) tensor split after N modes the
element ``t[i_1, ..., i_N, j_1, ..., j_M]`` lands at

    row = i_1 + i_2 I_1 + ... + i_N I_1...I_{N-1}
    col = j_1 + j_2 J_1 + ... + j_M J_1...J_{M-1}

(0-based). Every routine in the package that reshapes tensors goes through
:func:`matricize`/:func:`dematricize`, which makes that convention the single
source of truth. Mode indices in the public API are 0-based, like numpy axes.
"""

from __future__ import annotations

import sys
from math import prod
from typing import Sequence

import numpy as np

from .errors import ArgumentError, ShapeError

DEFAULT_TOL = 1e-10

__all__ = [
    "DEFAULT_TOL",
    "validate_shape",
    "matricize",
    "dematricize",
    "vec",
    "unvec",
    "vec_batch",
    "unvec_batch",
    "einstein_product",
    "contracted_product",
    "mode_n_product",
    "outer_product",
    "hermitian_transpose",
    "transpose",
    "identity_tensor",
    "is_square",
    "is_pseudo_diagonal",
    "is_hermitian",
    "is_unitary",
    "is_partially_symmetric",
    "frobenius_norm",
    "tensor_inverse",
    "tensor_det",
]


def validate_shape(dims: Sequence[int]) -> tuple[int, ...]:
    """Return ``dims`` as a tuple after checking it describes a valid tensor.

    Every mode must have size at least one, there must be at least one mode,
    and the total element count must be addressable on this platform.
    """
    try:
        dims = tuple(int(d) for d in dims)
    except TypeError:
        raise ShapeError(f"shape must be a sequence of integers, got {dims!r}") from None
    if len(dims) < 1:
        raise ShapeError("a tensor needs at least one mode")
    if any(d < 1 for d in dims):
        raise ShapeError(f"all mode sizes must be >= 1, got {dims}")
    if prod(dims) > sys.maxsize:
        raise ShapeError(f"shape {dims} has more elements than addressable")
    return dims


def _check_split(shape: tuple[int, ...], n_row: int) -> None:
    if not 1 <= n_row <= len(shape) - 1:
        raise ShapeError(
            f"mode split after {n_row} modes is invalid for an order-{len(shape)} tensor"
        )


def matricize(t: np.ndarray, n_row: int) -> np.ndarray:
    """Map an order-(N+M) tensor to a (I_1...I_N) x (J_1...J_M) matrix.

    ``n_row`` is the number of leading modes grouped into rows; the remaining
    modes form the columns. The inverse is :func:`dematricize`.
    """
    t = np.asarray(t)
    _check_split(t.shape, n_row)
    rows = prod(t.shape[:n_row])
    return np.reshape(t, (rows, -1), order="F")


def dematricize(m: np.ndarray, shape: Sequence[int], n_row: int) -> np.ndarray:
    """Inverse of :func:`matricize` for a target tensor ``shape``."""
    m = np.asarray(m)
    shape = validate_shape(shape)
    _check_split(shape, n_row)
    expected = (prod(shape[:n_row]), prod(shape[n_row:]))
    if m.shape != expected:
        raise ShapeError(f"matrix of shape {m.shape} cannot hold a {shape} tensor split at {n_row}")
    return np.reshape(m, shape, order="F")


def vec(t: np.ndarray) -> np.ndarray:
    """Column-major vectorization (first index fastest)."""
    return np.reshape(np.asarray(t), -1, order="F")


def unvec(v: np.ndarray, shape: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`vec`."""
    shape = validate_shape(shape)
    v = np.asarray(v)
    if v.size != prod(shape):
        raise ShapeError(f"{v.size} entries cannot fill shape {shape}")
    return np.reshape(v, shape, order="F")


def vec_batch(x: np.ndarray) -> np.ndarray:
    """Vectorize a stack of tensors ``x[s]`` into the rows of an (n, K) matrix."""
    x = np.asarray(x)
    n = x.shape[0]
    return np.reshape(np.moveaxis(x, 0, -1), (-1, n), order="F").T


def unvec_batch(m: np.ndarray, shape: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`vec_batch`: rows of ``m`` become tensors of ``shape``."""
    shape = validate_shape(shape)
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[1] != prod(shape):
        raise ShapeError(f"rows of length {m.shape[-1]} cannot fill shape {shape}")
    return np.moveaxis(np.reshape(m.T, shape + (m.shape[0],), order="F"), -1, 0)


def einstein_product(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """Contract the trailing ``n`` modes of ``a`` with the leading ``n`` modes of ``b``.

    The result has the leading modes of ``a`` followed by the trailing modes
    of ``b``; contracting every mode of both operands gives a 0-d array.
    ``n = 0`` reduces to the outer product.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if not 0 <= n <= min(a.ndim, b.ndim):
        raise ShapeError(f"cannot contract {n} modes of tensors of order {a.ndim} and {b.ndim}")
    if a.shape[a.ndim - n:] != b.shape[:n]:
        raise ShapeError(
            f"trailing modes {a.shape[a.ndim - n:]} of a do not match leading modes {b.shape[:n]} of b"
        )
    return np.tensordot(a, b, axes=(list(range(a.ndim - n, a.ndim)), list(range(n))))


def _check_modes(modes: Sequence[int], order: int, name: str) -> list[int]:
    modes = [int(m) for m in modes]
    if len(set(modes)) != len(modes):
        raise ArgumentError(f"duplicate mode indices in {name}: {modes}")
    for m in modes:
        if not 0 <= m < order:
            raise ArgumentError(f"mode {m} in {name} is out of range for order {order}")
    return modes


def contracted_product(
    a: np.ndarray, b: np.ndarray, modes_a: Sequence[int], modes_b: Sequence[int]
) -> np.ndarray:
    """Contract ``a`` and ``b`` over arbitrary, pairwise-matched modes.

    ``modes_a[k]`` is summed against ``modes_b[k]``. The free modes of ``a``
    (in order) precede the free modes of ``b``.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    modes_a = _check_modes(modes_a, a.ndim, "modes_a")
    modes_b = _check_modes(modes_b, b.ndim, "modes_b")
    if len(modes_a) != len(modes_b):
        raise ArgumentError("modes_a and modes_b must have the same length")
    for ma, mb in zip(modes_a, modes_b):
        if a.shape[ma] != b.shape[mb]:
            raise ShapeError(f"mode {ma} of a (size {a.shape[ma]}) does not match mode {mb} of b (size {b.shape[mb]})")
    return np.tensordot(a, b, axes=(modes_a, modes_b))


def mode_n_product(t: np.ndarray, u: np.ndarray, n: int) -> np.ndarray:
    """Multiply mode ``n`` of ``t`` by the matrix ``u`` (shape J x I_n)."""
    t = np.asarray(t)
    u = np.asarray(u)
    if u.ndim != 2:
        raise ShapeError("mode-n product needs a matrix")
    if not 0 <= n < t.ndim:
        raise ArgumentError(f"mode {n} out of range for order {t.ndim}")
    if u.shape[1] != t.shape[n]:
        raise ShapeError(f"matrix with {u.shape[1]} columns cannot act on mode {n} of size {t.shape[n]}")
    return np.moveaxis(np.tensordot(u, t, axes=(1, n)), 0, n)


def outer_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Outer product; the result has order ``a.ndim + b.ndim``."""
    return np.multiply.outer(np.asarray(a), np.asarray(b))


def _swap_groups(t: np.ndarray, n_row: int) -> np.ndarray:
    _check_split(t.shape, n_row)
    axes = list(range(n_row, t.ndim)) + list(range(n_row))
    return np.transpose(t, axes)


def transpose(t: np.ndarray, n_row: int) -> np.ndarray:
    """Swap the leading ``n_row`` modes with the trailing ones."""
    return _swap_groups(np.asarray(t), n_row)


def hermitian_transpose(t: np.ndarray, n_row: int) -> np.ndarray:
    """Conjugate of :func:`transpose`; ``matricize(t^H) == matricize(t)^H``."""
    return np.conj(_swap_groups(np.asarray(t), n_row))


def identity_tensor(dims: Sequence[int]) -> np.ndarray:
    """Order-2N identity tensor whose matricization is the identity matrix."""
    dims = validate_shape(dims)
    k = prod(dims)
    return np.reshape(np.eye(k), dims + dims, order="F")


def is_square(t: np.ndarray, n_row: int | None = None) -> bool:
    t = np.asarray(t)
    if n_row is None:
        if t.ndim % 2:
            return False
        n_row = t.ndim // 2
    return 2 * n_row == t.ndim and t.shape[:n_row] == t.shape[n_row:]


def _square_matrix(t: np.ndarray, n_row: int | None) -> np.ndarray:
    t = np.asarray(t)
    if n_row is None:
        n_row = t.ndim // 2
    if not is_square(t, n_row):
        raise ArgumentError(f"tensor of shape {t.shape} is not square under a split after {n_row} modes")
    return matricize(t, n_row)


def is_pseudo_diagonal(t: np.ndarray, n_row: int, tol: float = DEFAULT_TOL) -> bool:
    m = matricize(t, n_row)
    off = m.copy()
    k = min(off.shape)
    off[np.arange(k), np.arange(k)] = 0
    return bool(np.all(np.abs(off) <= tol))


def is_hermitian(t: np.ndarray, n_row: int | None = None, tol: float = DEFAULT_TOL) -> bool:
    m = _square_matrix(t, n_row)
    return bool(np.all(np.abs(m - m.conj().T) <= tol))


def is_partially_symmetric(t: np.ndarray, n_row: int | None = None, tol: float = DEFAULT_TOL) -> bool:
    m = _square_matrix(t, n_row)
    return bool(np.all(np.abs(m - m.T) <= tol))


def is_unitary(t: np.ndarray, n_row: int | None = None, tol: float = DEFAULT_TOL) -> bool:
    m = _square_matrix(t, n_row)
    eye = np.eye(m.shape[0])
    return bool(
        np.all(np.abs(m.conj().T @ m - eye) <= tol) and np.all(np.abs(m @ m.conj().T - eye) <= tol)
    )


def frobenius_norm(t: np.ndarray) -> float:
    return float(np.linalg.norm(np.ravel(t)))


def tensor_inverse(t: np.ndarray, n_row: int | None = None) -> np.ndarray:
    """Inverse under the Einstein product ``*_N`` of a square tensor."""
    t = np.asarray(t)
    m = _square_matrix(t, n_row)
    n_row = t.ndim // 2 if n_row is None else n_row
    return dematricize(np.linalg.inv(m), t.shape, n_row)


def tensor_det(t: np.ndarray, n_row: int | None = None) -> complex:
    """Determinant of a square tensor, defined through its matricization."""
    return np.linalg.det(_square_matrix(t, n_row))
