"""Augmented and composite representations and second-order moment estimation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ArgumentError, ShapeError
from ..tensor_core import frobenius_norm

__all__ = [
    "augment",
    "composite",
    "augmented_covariance",
    "split_augmented",
    "MomentEstimate",
    "estimate_moments",
    "estimate_correlation",
    "propriety_statistic",
]


def augment(x: np.ndarray) -> np.ndarray:
    """Order-(N+1) augmented view ``x^a`` with ``x^a[..., 0] = x`` and ``x^a[..., 1] = conj(x)``."""
    x = np.asarray(x)
    return np.stack([x, np.conj(x)], axis=-1)


def composite(x: np.ndarray) -> np.ndarray:
    """Order-(N+1) real composite view with slices ``Re(x)`` and ``Im(x)``."""
    x = np.asarray(x)
    return np.stack([x.real, x.imag], axis=-1)


def augmented_covariance(q: np.ndarray, q_tilde: np.ndarray | None = None) -> np.ndarray:
    """Assemble the augmented covariance from ``Q`` and ``Q~``.

    The result has shape ``I + (2,) + I + (2,)`` and block layout
    ``[[Q, Q~], [conj(Q~), conj(Q)]]``, indexed by the two size-2 modes.
    """
    q = np.asarray(q)
    if q.ndim % 2:
        raise ShapeError("covariance must have even order")
    q_tilde = np.zeros_like(q) if q_tilde is None else np.asarray(q_tilde)
    if q_tilde.shape != q.shape:
        raise ShapeError(f"pseudo-covariance shape {q_tilde.shape} differs from covariance shape {q.shape}")
    n = q.ndim // 2
    blocks = np.array([[q, q_tilde], [np.conj(q_tilde), np.conj(q)]])
    return np.moveaxis(blocks, [0, 1], [n, 2 * n + 1])


def split_augmented(qa: np.ndarray):
    """Return the four blocks ``(Q, Q~, conj(Q~), conj(Q))`` of an augmented covariance."""
    qa = np.asarray(qa)
    n = qa.ndim // 2 - 1
    blocks = np.moveaxis(qa, [n, 2 * n + 1], [0, 1])
    return blocks[0, 0], blocks[0, 1], blocks[1, 0], blocks[1, 1]


@dataclass(frozen=True)
class MomentEstimate:
    mean: np.ndarray
    cov: np.ndarray
    pseudo_cov: np.ndarray
    augmented: np.ndarray
    n_samples: int


def _as_stack(samples) -> np.ndarray:
    if isinstance(samples, np.ndarray):
        stack = samples
    else:
        samples = list(samples)
        shapes = {np.shape(s) for s in samples}
        if len(shapes) > 1:
            raise ShapeError(f"samples have differing shapes {sorted(shapes)}")
        stack = np.asarray(samples)
    if stack.ndim < 2 or stack.shape[0] < 2:
        raise ArgumentError("need at least two samples")
    return stack


def _second_moments(d: np.ndarray, chunk: int):
    # returns sum d o d* and sum d o d over the leading axis, accumulated in chunks
    n = d.shape[0]
    k = int(np.prod(d.shape[1:]))
    flat = d.reshape(n, k, order="C")
    qs = np.zeros((k, k), dtype=np.result_type(d, complex))
    ps = np.zeros((k, k), dtype=np.result_type(d, complex))
    for s in range(0, n, chunk):
        blk = flat[s:s + chunk]
        qs += blk.T @ blk.conj()
        ps += blk.T @ blk
    shape = d.shape[1:]
    return qs.reshape(shape + shape), ps.reshape(shape + shape)


def estimate_moments(samples, chunk: int = 4096) -> MomentEstimate:
    """Sample mean, covariance, pseudo-covariance and augmented covariance.

    Moments are normalized by ``1/n``. ``Q^`` is made exactly Hermitian and
    ``Q~^`` exactly partially symmetric by averaging with their (Hermitian)
    transposes.

    Parameters
    ----------
    samples : array of shape (n, *I) or sequence of equally shaped tensors
    chunk : int
        Number of samples folded into the running sums at a time.
    """
    x = _as_stack(samples)
    n = x.shape[0]
    mean = x.mean(axis=0)
    qs, ps = _second_moments(x - mean, chunk)
    q, pq = qs / n, ps / n
    order = q.ndim // 2
    swap = list(range(order, 2 * order)) + list(range(order))
    q = (q + np.conj(np.transpose(q, swap))) / 2
    pq = (pq + np.transpose(pq, swap)) / 2
    return MomentEstimate(mean, q, pq, augmented_covariance(q, pq), n)


def estimate_correlation(samples, chunk: int = 4096) -> np.ndarray:
    """Uncentered sample correlation ``(1/n) sum X o X*``."""
    x = _as_stack(samples)
    qs, _ = _second_moments(x, chunk)
    order = qs.ndim // 2
    swap = list(range(order, 2 * order)) + list(range(order))
    r = qs / x.shape[0]
    return (r + np.conj(np.transpose(r, swap))) / 2


def propriety_statistic(q: np.ndarray, q_tilde: np.ndarray) -> float:
    """``||Q~||_F / ||Q||_F``: 0 for proper data, 1 for real-valued data."""
    if np.shape(q) != np.shape(q_tilde):
        raise ShapeError("covariance and pseudo-covariance shapes differ")
    nq = frobenius_norm(q)
    if nq == 0:
        raise ArgumentError("propriety statistic is undefined for a zero covariance")
    return frobenius_norm(q_tilde) / nq
