"""Sampling of Gaussian random tensors with full, mode-restricted and separable correlation."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Sequence

import numpy as np

from ..errors import ArgumentError, NotPSDError, ShapeError
from ..spectral import tensor_evd
from ..tensor_core import (
    dematricize,
    einstein_product,
    hermitian_transpose,
    identity_tensor,
    matricize,
    mode_n_product,
    unvec_batch,
    validate_shape,
    vec_batch,
)

__all__ = [
    "PSD_CLAMP",
    "sample_iid",
    "correlation_sqrt",
    "sample_correlated",
    "build_mode_restricted_correlation",
    "SeparableCorrelation",
    "separable_to_full",
    "sample_separable",
    "hermitian_sqrt",
    "parameter_counts",
]

# eigenvalues in [-PSD_CLAMP * lambda_max, 0] are treated as round-off
PSD_CLAMP = 1e-8

_FLAVORS = ("circular", "real")


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def sample_iid(shape: Sequence[int], flavor: str = "circular", seed=None, size: int | None = None) -> np.ndarray:
    """Tensor with i.i.d. zero-mean unit-variance entries.

    Parameters
    ----------
    shape : sequence of int
        Tensor shape.
    flavor : {"circular", "real"}
        ``"circular"`` draws circular complex entries whose real and
        imaginary parts are independent N(0, 1/2); ``"real"`` draws N(0, 1).
    seed : int, Generator or None
        Anything accepted by :func:`numpy.random.default_rng`.
    size : int, optional
        If given, return a stack of ``size`` tensors along a new leading axis.
    """
    shape = validate_shape(shape)
    if flavor not in _FLAVORS:
        raise ArgumentError(f"flavor must be one of {_FLAVORS}, got {flavor!r}")
    rng = _rng(seed)
    full = shape if size is None else (int(size),) + shape
    if flavor == "real":
        return rng.standard_normal(full)
    return (rng.standard_normal(full) + 1j * rng.standard_normal(full)) / np.sqrt(2)


def _square_order(r: np.ndarray) -> int:
    if r.ndim % 2 or r.shape[: r.ndim // 2] != r.shape[r.ndim // 2:]:
        raise ShapeError(f"correlation tensor of shape {r.shape} is not square")
    return r.ndim // 2


def correlation_sqrt(r: np.ndarray, tol: float = PSD_CLAMP) -> np.ndarray:
    """Hermitian square root ``C`` with ``C *_N C^H = r``.

    Computed from the tensor EVD ``r = U *_N D *_N U^H`` as
    ``U *_N D^{1/2} *_N U^H``. Eigenvalues down to ``-tol * lambda_max`` are
    clamped to zero; anything more negative raises :class:`NotPSDError`.
    """
    r = np.asarray(r)
    n = _square_order(r)
    evd = tensor_evd(r, n)
    w = evd.eigenvalues
    floor = -tol * max(float(np.max(np.abs(w))), np.finfo(float).tiny)
    if w.min() < floor:
        raise NotPSDError(f"correlation has eigenvalue {w.min():.3e} below {floor:.3e}", float(w.min()))
    root = np.sqrt(np.clip(w, 0.0, None))
    d_half = dematricize(np.diag(root).astype(evd.u.dtype), r.shape, n)
    return einstein_product(einstein_product(evd.u, d_half, n), hermitian_transpose(evd.u, n), n)


def sample_correlated(r: np.ndarray, seed=None, size: int | None = None, flavor: str = "circular") -> np.ndarray:
    """Draw ``A = C *_N B`` with ``C = correlation_sqrt(r)`` and ``B`` i.i.d.

    With circular ``B`` the result has correlation ``E[A o A*] = r``.
    """
    r = np.asarray(r)
    n = _square_order(r)
    shape = r.shape[:n]
    c = correlation_sqrt(r)
    b = sample_iid(shape, flavor, seed, size=size)
    if size is None:
        return einstein_product(c, b, n)
    # batched version of C *_N B: vec(C *_N B) = mat(C) vec(B)
    return unvec_batch(vec_batch(b) @ matricize(c, n).T, shape)


def _check_hermitian_psd(m: np.ndarray, name: str) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"{name} must be a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if not np.allclose(m, m.conj().T, atol=1e-12 * scale, rtol=0):
        raise ArgumentError(f"{name} is not Hermitian")
    w = np.linalg.eigvalsh((m + m.conj().T) / 2)
    if w.min() < -PSD_CLAMP * max(float(np.abs(w).max()), 1e-300):
        raise ArgumentError(f"{name} is not positive semi-definite (min eigenvalue {w.min():.3e})")
    return m


def _permuted_outer(factors: Sequence[np.ndarray]) -> np.ndarray:
    # outer product has axes (i1, i1', i2, i2', ...); reorder to (i1..iN, i1'..iN')
    full = factors[0]
    for f in factors[1:]:
        full = np.multiply.outer(full, f)
    n = len(factors)
    return np.transpose(full, list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2)))


def build_mode_restricted_correlation(shape: Sequence[int], modes: Sequence[int], within_mode_corr) -> np.ndarray:
    """Correlation tensor that couples entries only across the listed modes.

    ``R[i, i']`` can be nonzero only where every unlisted mode has
    ``i_u == i_u'``. Modes are 0-based.

    Parameters
    ----------
    shape : sequence of int
        Shape ``I_1 x ... x I_N`` of the random tensor.
    modes : sequence of int
        The correlated modes.
    within_mode_corr : sequence of matrices or matrix
        Either one Hermitian PSD matrix per listed mode (size ``I_m``), which
        gives a separable structure across those modes, or a single joint
        matrix of size ``prod(I_m)`` over the listed modes (first listed mode
        fastest) for arbitrary inter- and intra-mode correlation.
    """
    shape = validate_shape(shape)
    modes = [int(m) for m in modes]
    if len(set(modes)) != len(modes) or any(not 0 <= m < len(shape) for m in modes):
        raise ArgumentError(f"invalid mode subset {modes} for an order-{len(shape)} tensor")
    if not modes:
        return identity_tensor(shape)
    joint = isinstance(within_mode_corr, np.ndarray) and within_mode_corr.ndim == 2
    if not joint:
        mats = list(within_mode_corr)
        if len(mats) != len(modes):
            raise ArgumentError(f"need one correlation matrix per listed mode ({len(modes)}), got {len(mats)}")
        factors = [np.eye(d) for d in shape]
        for m, mat in zip(modes, mats):
            mat = _check_hermitian_psd(mat, f"factor for mode {m}")
            if mat.shape[0] != shape[m]:
                raise ShapeError(f"factor for mode {m} has size {mat.shape[0]}, expected {shape[m]}")
            factors[m] = mat
        return _permuted_outer(factors)

    mat = _check_hermitian_psd(within_mode_corr, "joint correlation")
    sub = [shape[m] for m in modes]
    if mat.shape[0] != prod(sub):
        raise ShapeError(f"joint correlation has size {mat.shape[0]}, expected {prod(sub)}")
    n = len(shape)
    out = np.zeros(shape + shape, dtype=mat.dtype)
    idx = np.indices(shape + shape).reshape(2 * n, -1)
    free = [u for u in range(n) if u not in modes]
    keep = np.all(idx[free] == idx[[u + n for u in free]], axis=0) if free else np.ones(idx.shape[1], bool)
    row = np.ravel_multi_index(idx[modes][:, keep], sub, order="F")
    col = np.ravel_multi_index(idx[[m + n for m in modes]][:, keep], sub, order="F")
    out.reshape(-1)[np.flatnonzero(keep)] = mat[row, col]
    return out


def hermitian_sqrt(m: np.ndarray) -> np.ndarray:
    """Hermitian PSD square root ``A`` of a Hermitian PSD matrix, ``A A^H = m``."""
    w, q = np.linalg.eigh((m + m.conj().T) / 2)
    return (q * np.sqrt(np.clip(w, 0.0, None))) @ q.conj().T


@dataclass(frozen=True)
class SeparableCorrelation:
    """Correlation given by one Hermitian PSD factor ``Psi^(n)`` per mode."""

    factors: tuple
    square_roots: tuple = field(init=False, repr=False)

    def __post_init__(self):
        facs = tuple(_check_hermitian_psd(np.asarray(f), f"factor {k}") for k, f in enumerate(self.factors))
        if not facs:
            raise ArgumentError("a separable correlation needs at least one factor")
        object.__setattr__(self, "factors", facs)
        object.__setattr__(self, "square_roots", tuple(hermitian_sqrt(f) for f in facs))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(f.shape[0] for f in self.factors)


def separable_to_full(s: SeparableCorrelation) -> np.ndarray:
    """Full tensor ``R[i, i'] = prod_n Psi^(n)[i_n, i_n']`` (a permuted outer product)."""
    return _permuted_outer(s.factors)


def sample_separable(s: SeparableCorrelation, seed=None, size: int | None = None, flavor: str = "circular") -> np.ndarray:
    """Draw ``X x_1 A^(1) ... x_N A^(N)`` with ``X`` i.i.d.

    The vectorized samples have covariance ``Psi^(N) kron ... kron Psi^(1)``.
    """
    x = sample_iid(s.shape, flavor, seed, size=size)
    offset = 0 if size is None else 1
    for n, a in enumerate(s.square_roots):
        x = mode_n_product(x, a, n + offset)
    return x


def parameter_counts(mode_size: int, order: int) -> tuple[int, int]:
    """Free real parameters ``(full, separable)`` for an ``L^N`` tensor with real correlations.

    ``full = (L^{2N} + L^N) / 2`` counts a symmetric ``L^N x L^N`` matrix;
    ``separable = N (L^2 + L) / 2`` counts N symmetric ``L x L`` factors.
    """
    if mode_size < 1 or order < 1:
        raise ArgumentError("mode size and order must be positive")
    big = mode_size**order
    return (big * big + big) // 2, order * (mode_size**2 + mode_size) // 2
