"""Tensor EVD/SVD through matricization and the semicircle / Marcenko-Pastur laws."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import prod
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import ArgumentError
from .tensor_core import DEFAULT_TOL, dematricize, is_hermitian, matricize, validate_shape

__all__ = [
    "TensorEVD",
    "TensorSVD",
    "EmpiricalSpectrum",
    "tensor_evd",
    "tensor_svd",
    "semicircle_density",
    "semicircle_cdf",
    "marcenko_pastur_edges",
    "marcenko_pastur_density",
    "marcenko_pastur_atom",
    "marcenko_pastur_cdf",
    "empirical_spectrum_hermitian",
    "empirical_spectrum_rectangular",
    "ks_distance",
    "histogram_with_limit",
]


@dataclass(frozen=True)
class TensorEVD:
    u: np.ndarray
    d: np.ndarray
    eigenvalues: np.ndarray


@dataclass(frozen=True)
class TensorSVD:
    u: np.ndarray
    d: np.ndarray
    v: np.ndarray
    singular_values: np.ndarray


@dataclass(frozen=True)
class EmpiricalSpectrum:
    """Pooled spectrum of independent random tensors.

    ``values`` are sorted ascending. ``scale`` is the factor every tensor was
    multiplied by before its spectrum was taken.
    """

    values: np.ndarray
    kind: str
    row_dims: tuple[int, ...]
    col_dims: tuple[int, ...]
    scale: float
    n_trials: int
    pooled: bool = True
    metadata: dict = field(default_factory=dict)


def tensor_evd(t: np.ndarray, n_row: int | None = None, tol: float = DEFAULT_TOL) -> TensorEVD:
    """Eigendecomposition ``t = U *_N D *_N U^H`` of a Hermitian tensor.

    Eigenvalues are returned in descending order; ``D`` carries them on its
    pseudo-diagonal in the same order.
    """
    t = np.asarray(t)
    if n_row is None:
        n_row = t.ndim // 2
    scale = max(1.0, float(np.max(np.abs(t)))) if t.size else 1.0
    if not is_hermitian(t, n_row, tol * scale):
        raise ArgumentError("tensor_evd needs a Hermitian tensor")
    m = matricize(t, n_row)
    m = (m + m.conj().T) / 2
    w, q = np.linalg.eigh(m)
    order = np.argsort(w)[::-1]
    w, q = w[order], q[:, order]
    return TensorEVD(
        u=dematricize(q, t.shape, n_row),
        d=dematricize(np.diag(w).astype(q.dtype), t.shape, n_row),
        eigenvalues=w,
    )


def tensor_svd(t: np.ndarray, n_row: int) -> TensorSVD:
    """Singular value decomposition ``t = U *_N D *_M V^H`` for a split after ``n_row`` modes."""
    t = np.asarray(t)
    m = matricize(t, n_row)
    rows, cols = m.shape
    q_left, s, q_right_h = np.linalg.svd(m, full_matrices=True)
    d = np.zeros((rows, cols), dtype=np.result_type(m, float))
    d[np.arange(s.size), np.arange(s.size)] = s
    row_dims, col_dims = t.shape[:n_row], t.shape[n_row:]
    return TensorSVD(
        u=dematricize(q_left, row_dims + row_dims, n_row),
        d=dematricize(d, t.shape, n_row),
        v=dematricize(q_right_h.conj().T, col_dims + col_dims, len(col_dims)),
        singular_values=s,
    )


def semicircle_density(x, beta: float = 2.0):
    """Semicircle density on [-beta, beta]."""
    if beta <= 0:
        raise ArgumentError("beta must be positive")
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) <= beta
    out = np.zeros_like(x)
    out[inside] = 2.0 / (np.pi * beta**2) * np.sqrt(beta**2 - x[inside] ** 2)
    return out if out.ndim else float(out)


def semicircle_cdf(x, beta: float = 2.0):
    if beta <= 0:
        raise ArgumentError("beta must be positive")
    x = np.clip(np.asarray(x, dtype=float), -beta, beta)
    out = 0.5 + (x * np.sqrt(beta**2 - x**2)) / (np.pi * beta**2) + np.arcsin(x / beta) / np.pi
    out = np.clip(out, 0.0, 1.0)
    return out if out.ndim else float(out)


def marcenko_pastur_edges(c: float) -> tuple[float, float]:
    if c <= 0:
        raise ArgumentError("c must be positive")
    r = np.sqrt(c)
    return (1 - r) ** 2, (1 + r) ** 2


def marcenko_pastur_atom(c: float) -> float:
    """Mass of the point at zero (nonzero only when c > 1)."""
    if c <= 0:
        raise ArgumentError("c must be positive")
    return 1.0 - 1.0 / c if c > 1 else 0.0


def marcenko_pastur_density(x, c: float):
    """Absolutely continuous part of the Marcenko-Pastur law.

    The atom of weight ``1 - 1/c`` at zero for ``c > 1`` is reported by
    :func:`marcenko_pastur_atom` and included in :func:`marcenko_pastur_cdf`.
    """
    lo, hi = marcenko_pastur_edges(c)
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = (x > lo) & (x < hi) & (x > 0)
    xi = x[inside]
    out[inside] = np.sqrt((hi - xi) * (xi - lo)) / (2 * np.pi * c * xi)
    return out if out.ndim else float(out)


def _mp_theta_integrand(theta, c, mid, rad):
    # x = mid - rad*cos(theta) removes the square-root singularities at both edges
    return rad**2 * np.sin(theta) ** 2 / (2 * np.pi * c * (mid - rad * np.cos(theta)))


def marcenko_pastur_cdf(x, c: float):
    """CDF of the Marcenko-Pastur law including the atom at zero."""
    lo, hi = marcenko_pastur_edges(c)
    mid, rad = (lo + hi) / 2, (hi - lo) / 2
    atom = marcenko_pastur_atom(c)
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    out = np.empty_like(flat)
    # integrate between consecutive sorted abscissae and accumulate
    order = np.argsort(flat)
    acc, theta_prev = 0.0, 0.0
    for k in order:
        xk = flat[k]
        if xk < 0:
            out[k] = 0.0
            continue
        theta = np.arccos(np.clip((mid - min(max(xk, lo), hi)) / rad, -1.0, 1.0))
        if theta > theta_prev:
            acc += integrate.quad(_mp_theta_integrand, theta_prev, theta, args=(c, mid, rad), epsabs=1e-12, epsrel=1e-12, limit=200)[0]
            theta_prev = theta
        out[k] = min(1.0, atom + acc)
    out = out.reshape(x.shape)
    return out if out.ndim else float(out)


def _trial_rngs(seed, n_trials):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n_trials)]


def _complex_standard(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _run_trials(fn, rngs, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, rngs))
    return [fn(r) for r in rngs]


def empirical_spectrum_hermitian(
    dims: Sequence[int], n_trials: int, seed, workers: int | None = None
) -> EmpiricalSpectrum:
    """Pooled eigenvalues of scaled Hermitian random tensors of shape ``dims + dims``.

    Each trial draws a tensor ``G`` with i.i.d. circular complex entries of unit
    variance and symmetrizes it as ``(G + G^H) / sqrt(2)``, so every entry of
    the Hermitian tensor still has unit variance. Eigenvalues are taken after
    scaling by ``1/sqrt(prod(dims))``.
    """
    dims = validate_shape(dims)
    k = prod(dims)
    scale = 1.0 / np.sqrt(k)

    def one(rng):
        g = _complex_standard(rng, (k, k))
        a = (g + g.conj().T) / np.sqrt(2)
        return np.linalg.eigvalsh(a * scale)

    vals = np.sort(np.concatenate(_run_trials(one, _trial_rngs(seed, n_trials), workers)))
    return EmpiricalSpectrum(
        values=vals,
        kind="eigenvalues",
        row_dims=dims,
        col_dims=dims,
        scale=scale,
        n_trials=n_trials,
        metadata={"symmetrization": "(G + G^H)/sqrt(2)", "entries": "circular complex, unit variance"},
    )


def empirical_spectrum_rectangular(
    row_dims: Sequence[int], col_dims: Sequence[int], n_trials: int, seed, workers: int | None = None
) -> EmpiricalSpectrum:
    """Pooled squared singular values of ``A / sqrt(prod(col_dims))`` for i.i.d. ``A``."""
    row_dims, col_dims = validate_shape(row_dims), validate_shape(col_dims)
    rows, cols = prod(row_dims), prod(col_dims)
    scale = 1.0 / np.sqrt(cols)

    def one(rng):
        a = _complex_standard(rng, (rows, cols)) * scale
        s = np.linalg.svd(a, compute_uv=False)
        # a rows x cols matrix has min(rows, cols) singular values; pad zeros up to rows
        return np.concatenate([s**2, np.zeros(max(0, rows - cols))])

    vals = np.sort(np.concatenate(_run_trials(one, _trial_rngs(seed, n_trials), workers)))
    return EmpiricalSpectrum(
        values=vals,
        kind="squared_singular_values",
        row_dims=row_dims,
        col_dims=col_dims,
        scale=scale,
        n_trials=n_trials,
        metadata={"c": rows / cols, "entries": "circular complex, unit variance"},
    )


def ks_distance(spectrum, cdf: Callable) -> float:
    """Kolmogorov-Smirnov distance between an empirical sample and an analytic CDF."""
    values = spectrum.values if isinstance(spectrum, EmpiricalSpectrum) else spectrum
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    if n == 0:
        raise ArgumentError("empty spectrum")
    f = np.asarray(cdf(x), dtype=float)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(n) / n
    return float(max(upper.max(), lower.max()))


def histogram_with_limit(spectrum: EmpiricalSpectrum, density: Callable, bounds: tuple[float, float], bins: int = 40):
    """Histogram over the limit support widened by 10% on each side.

    Returns ``(edges, empirical_density, limit_density_at_centers)``.
    """
    lo, hi = bounds
    pad = 0.1 * (hi - lo)
    edges = np.linspace(lo - pad, hi + pad, bins + 1)
    counts, _ = np.histogram(spectrum.values, bins=edges)
    width = np.diff(edges)
    emp = counts / (spectrum.values.size * width)
    centers = (edges[:-1] + edges[1:]) / 2
    return edges, emp, np.asarray(density(centers), dtype=float)
