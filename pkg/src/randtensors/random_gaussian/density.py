"""Gaussian tensor densities and characteristic functions.

:func:`log_pdf` evaluates the density in tensor form with Einstein products
on the augmented tensors; :func:`log_pdf_vectorized` evaluates the same
density on vectorized data with ordinary matrices and serves as a check.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from ..errors import ArgumentError, ShapeError, SingularCovarianceError
from ..tensor_core import einstein_product, identity_tensor, matricize, tensor_inverse, vec
from .moments import augment, augmented_covariance

__all__ = [
    "FLAVORS",
    "GaussianSpec",
    "log_pdf",
    "log_pdf_vectorized",
    "characteristic_function",
    "empirical_cf",
]

FLAVORS = ("general", "proper", "circular", "real", "standard-real")

# condition numbers above this are treated as singular
_COND_LIMIT = 1e12


@dataclass(frozen=True)
class GaussianSpec:
    """Parameters of a Gaussian random tensor of shape ``I``.

    Attributes
    ----------
    mean : ndarray, shape I
    cov : ndarray, shape I + I
        Covariance ``Q``, Hermitian PSD.
    pseudo_cov : ndarray, shape I + I
        Pseudo-covariance ``Q~``; zero for the proper, circular and real
        flavors (for real tensors ``Q~ = Q`` and it is not used).
    flavor : str
        One of ``general``, ``proper``, ``circular``, ``real``, ``standard-real``.
    """

    mean: np.ndarray
    cov: np.ndarray
    pseudo_cov: np.ndarray
    flavor: str = "general"

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ArgumentError(f"flavor must be one of {FLAVORS}, got {self.flavor!r}")
        mean = np.asarray(self.mean)
        cov = np.asarray(self.cov)
        pq = np.zeros_like(cov) if self.pseudo_cov is None else np.asarray(self.pseudo_cov)
        if cov.shape != mean.shape * 2 or pq.shape != cov.shape:
            raise ShapeError(f"mean {mean.shape}, cov {cov.shape}, pseudo_cov {pq.shape} are inconsistent")
        tol = 1e-12 * max(1.0, float(np.max(np.abs(cov))))
        if self.flavor in ("proper", "circular") and np.max(np.abs(pq), initial=0) > tol:
            raise ArgumentError(f"{self.flavor} flavor needs a zero pseudo-covariance")
        if self.flavor == "circular" and np.max(np.abs(mean), initial=0) > 0:
            raise ArgumentError("circular flavor needs a zero mean")
        if self.flavor in ("real", "standard-real") and (np.iscomplexobj(mean) and np.any(mean.imag) or np.iscomplexobj(cov) and np.any(cov.imag)):
            raise ArgumentError("real flavors need a real mean and covariance")
        if self.flavor == "standard-real":
            if np.any(mean) or not np.allclose(cov, identity_tensor(mean.shape)):
                raise ArgumentError("standard-real flavor needs zero mean and identity covariance")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "pseudo_cov", pq)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.mean.shape

    @property
    def size(self) -> int:
        return prod(self.shape)

    @classmethod
    def standard_real(cls, shape) -> "GaussianSpec":
        shape = tuple(shape)
        eye = identity_tensor(shape)
        return cls(np.zeros(shape), eye, np.zeros_like(eye), "standard-real")

    @classmethod
    def proper(cls, mean, cov) -> "GaussianSpec":
        cov = np.asarray(cov)
        flavor = "circular" if not np.any(mean) else "proper"
        return cls(np.asarray(mean), cov, np.zeros_like(cov), flavor)

    def augmented(self) -> np.ndarray:
        return augmented_covariance(self.cov, self.pseudo_cov)


def _check_invertible(m: np.ndarray) -> None:
    cond = float(np.linalg.cond(m))
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise SingularCovarianceError(f"covariance is singular (condition number {cond:.3e})", cond)


def _real_logdet(m: np.ndarray) -> float:
    sign, logdet = np.linalg.slogdet(m)
    if abs(sign) == 0:
        raise SingularCovarianceError("covariance has zero determinant", np.inf)
    return float(np.real(logdet))


def _quad_form(d: np.ndarray, inv: np.ndarray, n: int, conj: bool = True) -> np.ndarray:
    # conj(d) *_n inv *_n d over the trailing n modes of d; leading modes of d are a batch
    left = einstein_product(np.conj(d) if conj else d, inv, n)
    return np.real(np.sum(left * d, axis=tuple(range(d.ndim - n, d.ndim))))


def log_pdf(spec: GaussianSpec, x: np.ndarray):
    """Log-density of ``spec`` at the tensor ``x``, evaluated in tensor form.

    The quadratic forms are Einstein products over all modes of the
    (augmented) deviation tensor; only the determinant goes through the
    matricization, which is how the tensor determinant is defined. ``x`` may
    carry extra leading batch axes, in which case an array is returned.
    """
    x = np.asarray(x)
    n = len(spec.shape)
    if x.shape[x.ndim - n:] != spec.shape:
        raise ShapeError(f"x has shape {x.shape}, spec expects trailing shape {spec.shape}")
    k = spec.size
    d = x - spec.mean
    if spec.flavor == "standard-real":
        out = -0.5 * k * np.log(2 * np.pi) - 0.5 * np.sum(np.abs(d) ** 2, axis=tuple(range(x.ndim - n, x.ndim)))
    elif spec.flavor == "real":
        q = spec.cov.real
        _check_invertible(matricize(q, n))
        quad = _quad_form(d.real, tensor_inverse(q, n), n, conj=False)
        out = -0.5 * k * np.log(2 * np.pi) - 0.5 * _real_logdet(matricize(q, n)) - 0.5 * quad
    elif spec.flavor in ("proper", "circular"):
        q = spec.cov
        _check_invertible(matricize(q, n))
        quad = _quad_form(d, tensor_inverse(q, n), n)
        out = -k * np.log(np.pi) - _real_logdet(matricize(q, n)) - quad
    else:
        qa = spec.augmented()
        _check_invertible(matricize(qa, n + 1))
        quad = _quad_form(augment(d), tensor_inverse(qa, n + 1), n + 1)
        out = -k * np.log(np.pi) - 0.5 * _real_logdet(matricize(qa, n + 1)) - 0.5 * quad
    return float(out) if np.ndim(out) == 0 else out


def log_pdf_vectorized(spec: GaussianSpec, x: np.ndarray) -> float:
    """Same density as :func:`log_pdf`, evaluated on ``vec(x)`` with plain matrices."""
    x = np.asarray(x)
    if x.shape != spec.shape:
        raise ShapeError(f"x has shape {x.shape}, spec expects {spec.shape}")
    k = spec.size
    d = vec(x) - vec(spec.mean)
    n = x.ndim
    qm = matricize(spec.cov, n)
    if spec.flavor in ("real", "standard-real"):
        qm = qm.real
        _check_invertible(qm)
        sol = np.linalg.solve(qm, d.real)
        return float(-0.5 * k * np.log(2 * np.pi) - 0.5 * _real_logdet(qm) - 0.5 * d.real @ sol)
    pm = matricize(spec.pseudo_cov, n)
    big = np.block([[qm, pm], [pm.conj(), qm.conj()]])
    da = np.concatenate([d, d.conj()])
    _check_invertible(big)
    sol = np.linalg.solve(big, da)
    return float(-k * np.log(np.pi) - 0.5 * _real_logdet(big) - 0.5 * np.real(da.conj() @ sol))


def characteristic_function(spec: GaussianSpec, w: np.ndarray) -> complex:
    """``E[exp(i Re<W, X>)]`` with ``<W, X> = W* *_N X``.

    For a zero-mean proper spec this is ``exp(-1/4 W* *_N Q *_N W)``. The
    general case adds the mean phase and the pseudo-covariance term
    ``Re(W* *_N Q~ *_N W*)``.
    """
    w = np.asarray(w)
    if w.shape != spec.shape:
        raise ShapeError(f"w has shape {w.shape}, spec expects {spec.shape}")
    n = w.ndim
    if spec.flavor in ("real", "standard-real"):
        # X real: Re<W, X> = Re(W)^T X, variance Re(W)^T Q Re(W)
        wr = w.real
        var = np.real(einstein_product(wr, einstein_product(spec.cov.real, wr, n), n))
        phase = np.real(einstein_product(wr, spec.mean.real, n))
        return complex(np.exp(1j * phase - 0.5 * var))
    wc = np.conj(w)
    quad = np.real(einstein_product(wc, einstein_product(spec.cov, w, n), n))
    pseudo = np.real(einstein_product(wc, einstein_product(spec.pseudo_cov, wc, n), n))
    phase = np.real(einstein_product(wc, spec.mean, n))
    return complex(np.exp(1j * phase - 0.25 * (quad + pseudo)))


def empirical_cf(samples: np.ndarray, w: np.ndarray) -> complex:
    """Monte Carlo estimate ``mean_s exp(i Re(W* *_N X_s))`` over a stack of samples."""
    samples = np.asarray(samples)
    w = np.asarray(w)
    if samples.shape[1:] != w.shape:
        raise ShapeError(f"samples of shape {samples.shape[1:]} do not match w {w.shape}")
    inner = np.tensordot(samples, np.conj(w), axes=(list(range(1, samples.ndim)), list(range(w.ndim))))
    return complex(np.mean(np.exp(1j * np.real(inner))))
