"""Empirical checks of separable MIMO channel correlations.

A channel tensor ``H`` has receive modes ``J_1..J_M`` followed by transmit
modes ``I_1..I_N``. Its correlation ``R[j, i, j', i'] = E[H[j, i] H*[j', i']]``
is separable when ``R = G_R[j, j'] G_T[i, i']``. Then the transmit
correlation seen from any fixed receive index ``j`` is the same tensor
``G_T`` and vice versa; the functions here measure that uniformity on
simulated channels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod

import numpy as np
from scipy.linalg import toeplitz

from ..errors import ArgumentError, ShapeError
from ..tensor_core import dematricize, is_hermitian, matricize
from .sampling import correlation_sqrt, sample_correlated

__all__ = [
    "unit_correlation_matrix",
    "separable_channel_correlation",
    "Lemma1Report",
    "verify_lemma1",
    "counterexample_correlation",
    "KroneckerReport",
    "kronecker_counterexample_check",
]


def unit_correlation_matrix(rho: complex, size: int = 2) -> np.ndarray:
    """Hermitian Toeplitz matrix with entries ``rho^k`` above the diagonal.

    For ``size = 2`` this is ``[[1, rho], [conj(rho), 1]]``. It is PSD for
    ``|rho| < 1``.
    """
    powers = np.asarray(rho, dtype=complex) ** np.arange(size)
    return toeplitz(np.conj(powers), powers)


def separable_channel_correlation(g_r: np.ndarray, g_t: np.ndarray) -> np.ndarray:
    """Correlation of order ``2(M+N)`` with entries ``G_R[j, j'] G_T[i, i']``."""
    g_r, g_t = np.asarray(g_r), np.asarray(g_t)
    m, n = g_r.ndim // 2, g_t.ndim // 2
    outer = np.multiply.outer(g_r, g_t)  # axes (j, j', i, i')
    axes = (
        list(range(m))
        + list(range(2 * m, 2 * m + n))
        + list(range(m, 2 * m))
        + list(range(2 * m + n, 2 * m + 2 * n))
    )
    return np.transpose(outer, axes)


def _check_unit_correlation(g: np.ndarray, name: str, tol: float) -> None:
    if g.ndim % 2 or g.shape[: g.ndim // 2] != g.shape[g.ndim // 2:]:
        raise ShapeError(f"{name} of shape {g.shape} is not square")
    if not is_hermitian(g, tol=tol):
        raise ArgumentError(f"{name} is not Hermitian")
    if not np.allclose(np.diag(matricize(g, g.ndim // 2)), 1.0, atol=tol, rtol=0):
        raise ArgumentError(f"{name} must have a unit pseudo-diagonal")


@dataclass(frozen=True)
class Lemma1Report:
    """Outcome of :func:`verify_lemma1`.

    ``transmit_estimates[j]`` is the transmit correlation estimated at the
    ``j``-th receive index (receive indices flattened first-mode-fastest),
    and likewise for ``receive_estimates``. Deviations are Frobenius norms
    against the true factors, maximized over the fixed index.
    """

    correlation: np.ndarray
    transmit_estimates: np.ndarray
    receive_estimates: np.ndarray
    transmit_deviation: float
    receive_deviation: float
    pseudo_diagonal_deviation: float
    n_samples: int
    per_index_transmit: np.ndarray = field(repr=False)
    per_index_receive: np.ndarray = field(repr=False)

    @property
    def uniformity_deviation(self) -> float:
        return max(self.transmit_deviation, self.receive_deviation)


def verify_lemma1(g_r: np.ndarray, g_t: np.ndarray, n_samples: int, seed=None, tol: float = 1e-10) -> Lemma1Report:
    """Sample channels with a separable correlation and measure per-index uniformity.

    Parameters
    ----------
    g_r, g_t : ndarray
        Receive (order 2M) and transmit (order 2N) correlation tensors,
        Hermitian PSD with unit pseudo-diagonal.
    n_samples : int
        Number of simulated channels.
    seed : int or Generator, optional
    """
    g_r, g_t = np.asarray(g_r), np.asarray(g_t)
    _check_unit_correlation(g_r, "G_R", tol)
    _check_unit_correlation(g_t, "G_T", tol)
    if n_samples < 2:
        raise ArgumentError("need at least two samples")
    r = separable_channel_correlation(g_r, g_t)
    correlation_sqrt(r)  # raises NotPSDError early if the inputs are not PSD
    rdims, tdims = g_r.shape[: g_r.ndim // 2], g_t.shape[: g_t.ndim // 2]
    kr, kt = prod(rdims), prod(tdims)
    h = sample_correlated(r, seed=seed, size=n_samples)
    # flatten receive and transmit groups separately, first mode fastest
    hm = np.reshape(np.moveaxis(h, 0, -1), (kr, kt, n_samples), order="F")
    gt_hat = np.einsum("jas,jbs->jab", hm, hm.conj()) / n_samples
    gr_hat = np.einsum("ais,bis->iab", hm, hm.conj()) / n_samples
    gt_ref, gr_ref = matricize(g_t, len(tdims)), matricize(g_r, len(rdims))
    dev_t = np.linalg.norm(gt_hat - gt_ref, axis=(1, 2))
    dev_r = np.linalg.norm(gr_hat - gr_ref, axis=(1, 2))
    diag_dev = max(
        float(np.max(np.abs(np.diagonal(gt_hat, axis1=1, axis2=2) - 1))),
        float(np.max(np.abs(np.diagonal(gr_hat, axis1=1, axis2=2) - 1))),
    )
    return Lemma1Report(
        correlation=r,
        transmit_estimates=np.stack([dematricize(g, tdims + tdims, len(tdims)) for g in gt_hat]),
        receive_estimates=np.stack([dematricize(g, rdims + rdims, len(rdims)) for g in gr_hat]),
        transmit_deviation=float(dev_t.max()),
        receive_deviation=float(dev_r.max()),
        pseudo_diagonal_deviation=diag_dev,
        n_samples=n_samples,
        per_index_transmit=dev_t,
        per_index_receive=dev_r,
    )


def counterexample_correlation(rho, mu, nu, gamma) -> np.ndarray:
    """4x4 correlation of ``vec(H) = [h11, h21, h12, h22]`` for a 2x2 channel.

    Diagonal blocks carry the receive correlation ``rho``, the block
    off-diagonal carries ``mu`` on its diagonal and the cross terms ``nu``
    and ``gamma``. The Kronecker model ``R_T kron R_R`` is the special case
    ``nu = rho mu`` and ``gamma = mu conj(rho)`` (for real parameters both
    cross terms equal ``rho mu``).
    """
    rho, mu, nu, gamma = (complex(v) for v in (rho, mu, nu, gamma))
    c = np.conj
    return np.array(
        [
            [1, rho, mu, nu],
            [c(rho), 1, gamma, mu],
            [c(mu), c(gamma), 1, rho],
            [c(nu), c(mu), c(rho), 1],
        ]
    )


@dataclass(frozen=True)
class KroneckerReport:
    r_mimo: np.ndarray
    r_kron: np.ndarray
    receive_blocks: tuple
    transmit_blocks: tuple
    min_eigenvalue: float
    uniform: bool
    kron_gap: float
    differing_entries: list
    empirical_deviation: float | None = None
    empirical_receive: tuple | None = None
    empirical_transmit: tuple | None = None

    @property
    def is_psd(self) -> bool:
        return self.min_eigenvalue >= -1e-12

    @property
    def separable(self) -> bool:
        return self.kron_gap <= 1e-12


def kronecker_counterexample_check(
    rho, mu, nu, gamma, n_samples: int = 0, seed=None, tol: float = 1e-12
) -> KroneckerReport:
    """Check uniformity and Kronecker separability of the 2x2 counterexample correlation.

    Per-mode correlations are read from the order-4 tensor
    ``R[j, i, j', i']``: the receive correlation at transmit index ``i`` is
    ``R[:, i, :, i]`` and the transmit correlation at receive index ``j`` is
    ``R[j, :, j, :]``. With ``n_samples > 0`` channels are drawn and the same
    per-mode correlations are estimated from them.

    ``differing_entries`` lists 1-based ``(row, col, R_MIMO, R_T kron R_R)``.
    """
    if abs(rho) + abs(mu) + abs(nu) >= 1 or abs(rho) + abs(gamma) + abs(mu) >= 1:
        raise ArgumentError("need |rho|+|mu|+|nu| < 1 and |rho|+|gamma|+|mu| < 1 for diagonal dominance")
    r_mimo = counterexample_correlation(rho, mu, nu, gamma)
    rt = dematricize(r_mimo, (2, 2, 2, 2), 2)
    receive = tuple(rt[:, i, :, i] for i in range(2))
    transmit = tuple(rt[j, :, j, :] for j in range(2))
    uniform = bool(
        np.allclose(receive[0], receive[1], atol=tol, rtol=0) and np.allclose(transmit[0], transmit[1], atol=tol, rtol=0)
    )
    r_kron = np.kron(transmit[0], receive[0])
    diff = np.abs(r_mimo - r_kron)
    entries = [
        (int(a) + 1, int(b) + 1, complex(r_mimo[a, b]), complex(r_kron[a, b]))
        for a, b in zip(*np.nonzero(diff > tol))
    ]
    emp_dev = emp_r = emp_t = None
    if n_samples:
        h = sample_correlated(rt, seed=seed, size=n_samples)
        emp_r = tuple(np.einsum("sa,sb->ab", h[:, :, i], h[:, :, i].conj()) / n_samples for i in range(2))
        emp_t = tuple(np.einsum("sa,sb->ab", h[:, j, :], h[:, j, :].conj()) / n_samples for j in range(2))
        emp_dev = float(
            max(
                max(np.linalg.norm(e - receive[0]) for e in emp_r),
                max(np.linalg.norm(e - transmit[0]) for e in emp_t),
            )
        )
    return KroneckerReport(
        r_mimo=r_mimo,
        r_kron=r_kron,
        receive_blocks=receive,
        transmit_blocks=transmit,
        min_eigenvalue=float(np.linalg.eigvalsh(r_mimo).min()),
        uniform=uniform,
        kron_gap=float(np.linalg.norm(r_mimo - r_kron)),
        differing_entries=entries,
        empirical_deviation=emp_dev,
        empirical_receive=emp_r,
        empirical_transmit=emp_t,
    )
