"""Rank-one spiked tensor models, power iterations and alignment theory.

The symmetric model observes ``A = beta x^N + W / sqrt(I)`` with ``W`` a
symmetric Gaussian tensor of density proportional to ``exp(-||W||_F^2 / 2)``.
The asymmetric model observes ``A = beta x_1 o ... o x_N + W / sqrt(sum I_k)``
with i.i.d. standard Gaussian ``W``. Z-eigenpairs (symmetric) and
Z-singular tuples (asymmetric) are computed by normalized power iterations
and compared with the large-dimensional predictions of the alignments
``|<u, x>|``.
"""

from __future__ import annotations

import csv
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import factorial
from pathlib import Path

import numpy as np
from scipy.optimize import brentq, curve_fit

from .errors import ArgumentError, ConvergenceError, DegenerateIterateError, DomainError, ShapeError

__all__ = [
    "sample_symmetric_noise",
    "symmetric_noise_variance",
    "random_unit_vector",
    "SymmetricSpikedModel",
    "AsymmetricSpikedModel",
    "SpikedObservation",
    "ZEigenpair",
    "power_iteration_symmetric",
    "power_iteration_asymmetric",
    "best_of_restarts",
    "symmetric_residual",
    "asymmetric_residual",
    "loss_symmetric",
    "loss_asymmetric",
    "beta_n",
    "m_stieltjes",
    "phi_n",
    "omega_n",
    "AlignmentPrediction",
    "symmetric_alignment_prediction",
    "asymmetric_g_solver",
    "asymmetric_edge",
    "asymmetric_lambda_equation",
    "asymmetric_alignment_prediction",
    "SweepResult",
    "alignment_sweep",
    "transition_beta",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 2000
# admissible-domain search grid: edge + logspace(-10, log10(GRID_SPAN))
GRID_SPAN = 50.0
GRID_POINTS = 2000


# ----------------------------------------------------------------------------
# noise and models
# ----------------------------------------------------------------------------


def _multiset_layout(order: int, dim: int):
    """Sorted index tuples of every entry and the multiset variance factor."""
    dtype = np.int16 if dim < 2**15 else np.intp
    idx = np.indices((dim,) * order, dtype=dtype).reshape(order, -1)
    idx.sort(axis=0)
    # prod_k (number of earlier equal entries + 1) = prod of multiplicity factorials
    mult = np.ones(idx.shape[1])
    for k in range(1, order):
        run = np.ones(idx.shape[1])
        for j in range(k):
            run += idx[j] == idx[k]
        mult *= run
    return idx, mult / factorial(order)


def symmetric_noise_variance(index) -> float:
    """Variance of the entry at ``index``: ``prod_v m_v! / N!`` over multiplicities ``m_v``."""
    _, counts = np.unique(np.asarray(index), return_counts=True)
    return float(np.prod([factorial(int(c)) for c in counts]) / factorial(len(index)))


def sample_symmetric_noise(order: int, dim: int, seed=None) -> np.ndarray:
    """Fully symmetric real Gaussian tensor with density ``~ exp(-||W||_F^2 / 2)``.

    One standard Gaussian is drawn per index multiset and scaled by the
    square root of :func:`symmetric_noise_variance`, so that every
    permutation of an index sees the same value. For ``N = 3`` the variances
    are 1 (all indices equal), 1/3 (two equal) and 1/6 (all distinct).

    Parameters
    ----------
    order : int
        Tensor order ``N >= 2``.
    dim : int
        Mode size ``I``.
    seed : int or Generator, optional
    """
    if order < 2 or dim < 1:
        raise ArgumentError(f"need order >= 2 and dim >= 1, got {order}, {dim}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim,) * order)
    idx, var = _multiset_layout(order, dim)
    return (g[tuple(idx)] * np.sqrt(var)).reshape((dim,) * order)


def random_unit_vector(dim: int, rng, size=None) -> np.ndarray:
    """Uniform draw(s) on the unit sphere of ``R^dim``; ``size`` adds a leading axis."""
    shape = (dim,) if size is None else (size, dim)
    v = rng.standard_normal(shape)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _rank_one(vectors) -> np.ndarray:
    out = np.asarray(vectors[0])
    for v in vectors[1:]:
        out = np.multiply.outer(out, v)
    return out


@dataclass(frozen=True)
class SpikedObservation:
    """Observation ``tensor = signal + noise`` with both parts retained.

    ``signal`` is the scaled rank-one term and ``noise`` the scaled noise;
    ``tensor`` is their floating-point sum.
    """

    tensor: np.ndarray
    signal: np.ndarray
    noise: np.ndarray


@dataclass(frozen=True)
class SymmetricSpikedModel:
    """``A = beta x^N + W / sqrt(I)`` with ``W`` from :func:`sample_symmetric_noise`."""

    order: int
    dim: int
    beta: float
    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if self.order < 3:
            raise ArgumentError(f"order must be >= 3, got {self.order}")
        if x.shape != (self.dim,):
            raise ShapeError(f"x has shape {x.shape}, expected ({self.dim},)")
        if self.beta < 0:
            raise ArgumentError(f"beta must be nonnegative, got {self.beta}")
        if abs(np.linalg.norm(x) - 1) > 1e-12:
            raise ArgumentError("x must be a unit vector")
        object.__setattr__(self, "x", x)

    @classmethod
    def random(cls, order: int, dim: int, beta: float, seed=None) -> "SymmetricSpikedModel":
        """Model with ``x`` uniform on the unit sphere."""
        return cls(order, dim, float(beta), random_unit_vector(dim, np.random.default_rng(seed)))

    def generate(self, seed=None) -> SpikedObservation:
        signal = self.beta * _rank_one([self.x] * self.order)
        noise = sample_symmetric_noise(self.order, self.dim, seed) / np.sqrt(self.dim)
        return SpikedObservation(signal + noise, signal, noise)


@dataclass(frozen=True)
class AsymmetricSpikedModel:
    """``A = beta x_1 o ... o x_N + W / sqrt(sum I_k)`` with i.i.d. ``N(0, 1)`` entries in ``W``."""

    dims: tuple
    beta: float
    xs: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        xs = tuple(np.asarray(v, dtype=float) for v in self.xs)
        if len(dims) < 3:
            raise ArgumentError(f"order must be >= 3, got {len(dims)}")
        if len(xs) != len(dims) or any(v.shape != (d,) for v, d in zip(xs, dims)):
            raise ShapeError("planted vectors do not match dims")
        if self.beta < 0:
            raise ArgumentError(f"beta must be nonnegative, got {self.beta}")
        if any(abs(np.linalg.norm(v) - 1) > 1e-12 for v in xs):
            raise ArgumentError("planted vectors must be unit vectors")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "xs", xs)

    @property
    def order(self) -> int:
        return len(self.dims)

    @classmethod
    def random(cls, dims, beta: float, seed=None) -> "AsymmetricSpikedModel":
        """Model with each ``x_k`` uniform on its unit sphere."""
        rng = np.random.default_rng(seed)
        return cls(tuple(dims), float(beta), tuple(random_unit_vector(d, rng) for d in dims))

    def generate(self, seed=None) -> SpikedObservation:
        rng = np.random.default_rng(seed)
        signal = self.beta * _rank_one(self.xs)
        noise = rng.standard_normal(self.dims) / np.sqrt(sum(self.dims))
        return SpikedObservation(signal + noise, signal, noise)


# ----------------------------------------------------------------------------
# power iterations
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ZEigenpair:
    """Z-eigenpair ``(lam, u)`` or Z-singular tuple ``(lam, (u_1, ..., u_N))``.

    ``residual`` is ``||A *_{N-1} u^{N-1} - lam u||`` in the symmetric case
    and the largest per-mode analog in the asymmetric case. ``history``
    holds ``A *_N u_t^N`` (or ``A`` contracted with all ``u_t``) per iteration.
    """

    lam: float
    u: np.ndarray | tuple
    residual: float
    converged: bool
    iterations: int
    history: np.ndarray = field(default=None, repr=False)


def _contract_symmetric(a: np.ndarray, xs: np.ndarray) -> np.ndarray:
    # A *_{N-1} x^{N-1} for a batch xs of shape (R, I); returns (R, I)
    t = np.tensordot(xs, a, axes=([1], [a.ndim - 1]))
    for _ in range(a.ndim - 2):
        t = np.einsum("r...i,ri->r...", t, xs)
    return t


def symmetric_residual(a: np.ndarray, lam: float, u: np.ndarray) -> float:
    """``||A *_{N-1} u^{N-1} - lam u||``."""
    u = np.asarray(u, dtype=float)
    return float(np.linalg.norm(_contract_symmetric(a, u[None])[0] - lam * u))


def _check_symmetric(a: np.ndarray) -> None:
    if a.ndim < 3 or len(set(a.shape)) != 1:
        raise ShapeError(f"need a cubical tensor of order >= 3, got shape {a.shape}")


def power_iteration_symmetric(
    a: np.ndarray, x0: np.ndarray, max_iters: int = DEFAULT_MAX_ITERS, tol: float = DEFAULT_TOL, shift=0.0
):
    """Tensor power iteration ``x <- (A *_{N-1} x^{N-1} + shift x) / ||.||``.

    Parameters
    ----------
    a : ndarray
        Real symmetric tensor of order ``N >= 3``.
    x0 : ndarray, shape (I,) or (R, I)
        Starting vector, or ``R`` starting vectors iterated as a batch.
    max_iters : int
    tol : float
        Stop once ``||x_{t+1} - x_t|| <= tol`` (up to a global sign for even
        ``N``, where a negative eigenvalue flips the iterate each step).
    shift : float or "auto"
        Shift added to the contraction. Fixed points are unchanged. With
        ``shift >= (N - 1) ||A||_F`` ("auto") the iteration is the shifted
        symmetric power method and ``A *_N x_t^N`` is nondecreasing; the
        unshifted iteration does not guarantee this for odd ``N``. A shift
        slows the per-step movement, so the stopping threshold becomes
        ``tol / (1 + shift)``.

    Returns
    -------
    ZEigenpair or list of ZEigenpair
        One pair per starting vector.

    Raises
    ------
    DegenerateIterateError
        If a contraction ``A *_{N-1} x^{N-1}`` vanishes.
    """
    a = np.asarray(a, dtype=float)
    _check_symmetric(a)
    x0 = np.asarray(x0, dtype=float)
    single = x0.ndim == 1
    xs = np.atleast_2d(x0)
    if xs.shape[1] != a.shape[0]:
        raise ShapeError(f"x0 has length {xs.shape[1]}, tensor has mode size {a.shape[0]}")
    norms = np.linalg.norm(xs, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise DegenerateIterateError("zero starting vector")
    xs = xs / norms
    if isinstance(shift, str):
        if shift != "auto":
            raise ArgumentError(f"shift must be a number or 'auto', got {shift!r}")
        shift = (a.ndim - 1) * float(np.linalg.norm(a))
    n_r = xs.shape[0]
    even = a.ndim % 2 == 0
    done = np.zeros(n_r, dtype=bool)
    iters = np.zeros(n_r, dtype=int)
    history = [np.einsum("ri,ri->r", _contract_symmetric(a, xs), xs)]
    for t in range(1, max_iters + 1):
        g = _contract_symmetric(a, xs) + shift * xs
        gn = np.linalg.norm(g, axis=1, keepdims=True)
        if np.any(gn[~done] == 0):
            raise DegenerateIterateError("contraction A x^(N-1) vanished")
        new = np.where(done[:, None], xs, g / np.where(gn == 0, 1, gn))
        step = np.linalg.norm(new - xs, axis=1)
        if even and shift == 0:
            step = np.minimum(step, np.linalg.norm(new + xs, axis=1))
        xs = new
        history.append(np.einsum("ri,ri->r", _contract_symmetric(a, xs), xs))
        newly = ~done & (step <= tol / (1 + shift))
        iters[newly] = t
        done |= newly
        if done.all():
            break
    iters[~done] = max_iters
    g = _contract_symmetric(a, xs)
    lam = np.einsum("ri,ri->r", g, xs)
    res = np.linalg.norm(g - lam[:, None] * xs, axis=1)
    hist = np.array(history)
    out = [
        ZEigenpair(float(lam[r]), xs[r].copy(), float(res[r]), bool(done[r]), int(iters[r]), hist[: iters[r] + 1, r])
        for r in range(n_r)
    ]
    return out[0] if single else out


def _contraction_subscripts(order: int, skip: int) -> str:
    letters = string.ascii_lowercase[:order]
    operands = ",".join(f"r{letters[j]}" for j in range(order) if j != skip)
    return f"{letters},{operands}->r{letters[skip]}"


def _contract_asymmetric(a: np.ndarray, us, skip: int) -> np.ndarray:
    # A contracted with every us[j] except j = skip, batched over R
    return np.einsum(_contraction_subscripts(a.ndim, skip), a, *(u for j, u in enumerate(us) if j != skip))


def asymmetric_residual(a: np.ndarray, lam: float, us) -> float:
    """Largest per-mode residual ``||A(u_1, .., _, .., u_N) - lam u_k||``."""
    a = np.asarray(a, dtype=float)
    us = [np.asarray(u, dtype=float)[None] for u in us]
    return float(max(np.linalg.norm(_contract_asymmetric(a, us, k)[0] - lam * us[k][0]) for k in range(a.ndim)))


def power_iteration_asymmetric(a: np.ndarray, x0, max_iters: int = DEFAULT_MAX_ITERS, tol: float = DEFAULT_TOL):
    """Alternating normalized contractions (higher-order power method).

    Each sweep updates ``u_k <- A(u_1, .., u_{k-1}, _, u_{k+1}, .., u_N) / ||.||``
    for ``k = 1..N`` in turn, which never decreases ``A(u_1, .., u_N)``.

    Parameters
    ----------
    a : ndarray
        Real tensor of order ``N >= 3``.
    x0 : sequence of ndarray
        ``N`` starting vectors of shapes ``(I_k,)``, or ``(R, I_k)`` for a batch.
    max_iters, tol : see :func:`power_iteration_symmetric`

    Returns
    -------
    ZEigenpair or list of ZEigenpair
    """
    a = np.asarray(a, dtype=float)
    if a.ndim < 3:
        raise ShapeError(f"need order >= 3, got {a.ndim}")
    if len(x0) != a.ndim:
        raise ShapeError(f"need {a.ndim} starting vectors, got {len(x0)}")
    single = np.ndim(x0[0]) == 1
    us = [np.atleast_2d(np.asarray(u, dtype=float)) for u in x0]
    if any(u.shape[1] != d for u, d in zip(us, a.shape)):
        raise ShapeError("starting vectors do not match the tensor shape")
    if any(np.any(np.linalg.norm(u, axis=1) == 0) for u in us):
        raise DegenerateIterateError("zero starting vector")
    us = [u / np.linalg.norm(u, axis=1, keepdims=True) for u in us]
    n_r = us[0].shape[0]
    done = np.zeros(n_r, dtype=bool)
    iters = np.zeros(n_r, dtype=int)

    def value(vs):
        return np.einsum("ri,ri->r", _contract_asymmetric(a, vs, 0), vs[0])

    history = [value(us)]
    for t in range(1, max_iters + 1):
        old = [u.copy() for u in us]
        for k in range(a.ndim):
            g = _contract_asymmetric(a, us, k)
            gn = np.linalg.norm(g, axis=1, keepdims=True)
            if np.any(gn[~done] == 0):
                raise DegenerateIterateError(f"contraction for mode {k} vanished")
            us[k] = np.where(done[:, None], us[k], g / np.where(gn == 0, 1, gn))
        history.append(value(us))
        step = np.max([np.linalg.norm(u - o, axis=1) for u, o in zip(us, old)], axis=0)
        newly = ~done & (step <= tol)
        iters[newly] = t
        done |= newly
        if done.all():
            break
    iters[~done] = max_iters
    lam = value(us)
    res = np.max(
        [np.linalg.norm(_contract_asymmetric(a, us, k) - lam[:, None] * us[k], axis=1) for k in range(a.ndim)], axis=0
    )
    hist = np.array(history)
    out = [
        ZEigenpair(
            float(lam[r]),
            tuple(u[r].copy() for u in us),
            float(res[r]),
            bool(done[r]),
            int(iters[r]),
            hist[: iters[r] + 1, r],
        )
        for r in range(n_r)
    ]
    return out[0] if single else out


def best_of_restarts(pairs) -> ZEigenpair:
    """Pair with the largest ``lam`` among converged ones (among all if none converged)."""
    pairs = list(pairs)
    pool = [p for p in pairs if p.converged] or pairs
    return max(pool, key=lambda p: p.lam)


def loss_symmetric(a: np.ndarray, lam: float, u: np.ndarray) -> float:
    """``||A - lam u^N||_F^2``; its critical points are the Z-eigenpairs."""
    return float(np.sum((a - lam * _rank_one([np.asarray(u)] * a.ndim)) ** 2))


def loss_asymmetric(a: np.ndarray, lam: float, us) -> float:
    """``||A - lam u_1 o ... o u_N||_F^2``."""
    return float(np.sum((a - lam * _rank_one([np.asarray(u) for u in us])) ** 2))


# ----------------------------------------------------------------------------
# symmetric theory
# ----------------------------------------------------------------------------


def beta_n(order: int) -> float:
    """Semicircle scale ``2 / sqrt(N (N - 1))`` of the symmetric noise contractions."""
    return 2.0 / np.sqrt(order * (order - 1))


def m_stieltjes(z, beta: float):
    """Stieltjes transform of the semicircle law on ``[-beta, beta]`` for real ``z > beta``.

    ``m(z) = (2 / beta^2) (-z + z sqrt(1 - beta^2 / z^2))``.

    Raises
    ------
    DomainError
        If any ``z <= beta``, where the real branch does not apply.
    """
    z = np.asarray(z, dtype=float)
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if np.any(z <= beta):
        raise DomainError(f"m_stieltjes needs z > beta = {beta}")
    out = 2.0 / beta**2 * (-z + z * np.sqrt(1 - beta**2 / z**2))
    return float(out) if out.ndim == 0 else out


def _m_unchecked(z, beta):
    with np.errstate(invalid="ignore"):
        return 2.0 / beta**2 * (-z + z * np.sqrt(1 - beta**2 / z**2))


def omega_n(z, order: int, beta: float):
    """Predicted alignment ``((z + m_{beta_N}(z / (N-1)) / N) / beta)^{1 / (N - 2)}``."""
    m = _m_unchecked(np.asarray(z, dtype=float) / (order - 1), beta_n(order))
    base = (z + m / order) / beta
    with np.errstate(invalid="ignore"):
        return np.where(base >= 0, np.abs(base) ** (1.0 / (order - 2)), np.nan)


def phi_n(z, order: int, beta: float):
    """Right-hand side of the eigenvalue equation ``lam = beta w^N - m_{beta_N}(lam / (N-1)) / (N-1)``."""
    m = _m_unchecked(np.asarray(z, dtype=float) / (order - 1), beta_n(order))
    return beta * omega_n(z, order, beta) ** order - m / (order - 1)


@dataclass(frozen=True)
class AlignmentPrediction:
    """Large-dimensional prediction at one ``beta``.

    ``alpha`` is a float (symmetric) or a tuple with one entry per mode
    (asymmetric). When no admissible root exists the prediction is
    infeasible: ``lam`` is NaN and every alignment is reported as 0.
    ``roots`` lists all admissible solutions; the one with the largest
    ``lam`` is selected.
    """

    beta: float
    lam: float
    alpha: float | tuple
    feasible: bool
    residual: float
    roots: tuple = ()


def _grid_roots(f, lo: float, valid=lambda z: True):
    zs = lo + np.logspace(-10, np.log10(GRID_SPAN), GRID_POINTS)
    vals = np.array([f(z) for z in zs])
    roots = []
    for i in range(len(zs) - 1):
        a, b = vals[i], vals[i + 1]
        if np.isfinite(a) and np.isfinite(b) and a * b <= 0 and a != b:
            r = brentq(f, zs[i], zs[i + 1], xtol=1e-14, rtol=4 * np.finfo(float).eps)
            if valid(r):
                roots.append(r)
    return sorted(set(roots))


def symmetric_alignment_prediction(order: int, beta: float) -> AlignmentPrediction:
    """Solve ``lam = phi_N(lam)`` on ``lam > (N - 1) beta_N`` and return ``alpha = omega_N(lam)``.

    Roots are bracketed on a log-spaced grid above the domain edge and
    refined by Brent's method. Only roots with ``alpha`` in ``[0, 1]`` are
    admissible; with several, the largest ``lam`` is reported.
    """
    if order < 3:
        raise ArgumentError(f"order must be >= 3, got {order}")
    if beta <= 0:
        raise ArgumentError(f"beta must be positive, got {beta}")
    edge = (order - 1) * beta_n(order)

    def f(z):
        return float(z - phi_n(z, order, beta))

    def valid(z):
        w = float(omega_n(z, order, beta))
        return np.isfinite(w) and 0 <= w <= 1

    roots = _grid_roots(f, edge, valid)
    if not roots:
        return AlignmentPrediction(float(beta), float("nan"), 0.0, False, float("nan"), ())
    lam = roots[-1]
    return AlignmentPrediction(
        float(beta), float(lam), float(omega_n(lam, order, beta)), True, abs(f(lam)), tuple(roots)
    )


# ----------------------------------------------------------------------------
# asymmetric theory
# ----------------------------------------------------------------------------


def _check_ratios(c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or np.any(c <= 0) or np.any(c >= 1) or abs(c.sum() - 1) > 1e-12:
        raise ArgumentError(f"ratios must lie in (0, 1) and sum to 1, got {c.tolist()}")
    return c


def _h(w, c):
    # root of g^2 - w g - c = 0 that behaves like -c / w for large w
    return (w - np.sqrt(w * w + 4 * c)) / 2


def _z_of_w(w, c):
    return w - np.sum(_h(w, c))


def asymmetric_edge(c) -> tuple[float, float]:
    """Return ``(w*, z*)``: the existence set of the g-system is ``z > z*``.

    With ``w = z + sum_j g_j`` each ``g_k = (w - sqrt(w^2 + 4 c_k)) / 2`` and
    ``z(w) = w - sum_k g_k(w)`` is convex with its minimum ``z*`` at ``w*``.
    """
    c = _check_ratios(c)

    def dz(w):
        return 1 - np.sum((1 - w / np.sqrt(w * w + 4 * c)) / 2)

    hi = 1.0
    while dz(hi) <= 0:
        hi *= 2
    lo = -1.0
    while dz(lo) >= 0:
        lo *= 2
    w_star = brentq(dz, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return float(w_star), float(_z_of_w(w_star, c))


def asymmetric_g_solver(z: float, c) -> np.ndarray:
    """Solve ``g_k^2 - (sum_j g_j + z) g_k - c_k = 0`` for ``k = 1..N``.

    The branch with ``g_k ~ -c_k / z`` as ``z -> inf`` is selected. The
    system is reduced to the scalar equation ``z(w) = z`` in
    ``w = z + sum_j g_j``, which has a unique solution on the branch
    ``w > w*`` exactly when ``z > z*`` (see :func:`asymmetric_edge`).

    Raises
    ------
    DomainError
        If ``z`` is outside the existence set.
    ConvergenceError
        If the returned ``g`` violates the equations by more than ``1e-12``.
    """
    c = _check_ratios(c)
    w_star, z_star = asymmetric_edge(c)
    if not z > z_star:
        raise DomainError(f"z = {z} is outside the existence set z > {z_star:.15g}")
    # z(w) >= w for w > 0, so the root lies below max(z, w*) + 1
    hi = max(z, w_star) + 1.0
    w = brentq(lambda v: _z_of_w(v, c) - z, w_star, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    g = _h(w, c)
    res = np.abs(g**2 - (g.sum() + z) * g - c)
    if res.max() > 1e-12 * max(1.0, abs(z)) ** 2:
        raise ConvergenceError(f"g-system residual {res.max():.3e} exceeds tolerance")
    return g


def asymmetric_lambda_equation(z: float, beta: float, c) -> tuple[float, np.ndarray]:
    """Return ``(z + sum_k g_k(z) - beta prod_k q_k(z), q)`` with ``q_k = sqrt(1 - g_k^2 / c_k)``.

    ``q`` is NaN for modes with ``g_k^2 > c_k``.
    """
    c = np.asarray(c, dtype=float)
    g = asymmetric_g_solver(z, c)
    with np.errstate(invalid="ignore"):
        q = np.sqrt(1 - g**2 / c)
    return float(z + g.sum() - beta * np.prod(q)), q


def asymmetric_alignment_prediction(dims, beta: float) -> AlignmentPrediction:
    """Solve the asymmetric eigenvalue equation with ``c_k = I_k / sum I``.

    Returns ``alpha_k = q_k(lam)`` for the largest admissible root ``lam``.
    """
    dims = np.asarray(dims, dtype=float)
    if dims.ndim != 1 or len(dims) < 3 or np.any(dims < 1):
        raise ArgumentError(f"need at least three dims >= 1, got {dims.tolist()}")
    if beta <= 0:
        raise ArgumentError(f"beta must be positive, got {beta}")
    c = dims / dims.sum()
    c = c / c.sum()
    _, z_star = asymmetric_edge(c)

    def f(z):
        return asymmetric_lambda_equation(z, beta, c)[0]

    def valid(z):
        q = asymmetric_lambda_equation(z, beta, c)[1]
        return bool(np.all(np.isfinite(q)) and np.all((q >= 0) & (q <= 1)))

    roots = _grid_roots(f, z_star, valid)
    n = len(dims)
    if not roots:
        return AlignmentPrediction(float(beta), float("nan"), (0.0,) * n, False, float("nan"), ())
    lam = roots[-1]
    val, q = asymmetric_lambda_equation(lam, beta, c)
    return AlignmentPrediction(float(beta), float(lam), tuple(float(v) for v in q), True, abs(val), tuple(roots))


# ----------------------------------------------------------------------------
# sweeps
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    """Empirical and predicted alignments over a grid of ``beta``.

    ``alignments`` has shape ``(n_beta, n_trials, n_modes)`` with
    ``n_modes = 1`` for the symmetric family; ``lambdas`` has shape
    ``(n_beta, n_trials)``. Theory arrays have shape ``(n_beta, n_modes)``
    and ``(n_beta,)``.
    """

    family: str
    betas: np.ndarray
    alignments: np.ndarray
    lambdas: np.ndarray
    converged: np.ndarray
    theory_alpha: np.ndarray
    theory_lambda: np.ndarray
    feasible: np.ndarray
    theory_residual: np.ndarray

    @property
    def mean_alignment(self) -> np.ndarray:
        return self.alignments.mean(axis=1)

    @property
    def std_alignment(self) -> np.ndarray:
        return self.alignments.std(axis=1)

    def to_csv(self, path) -> Path:
        """Write one row per ``(beta, mode)``; all quantities are dimensionless."""
        path = Path(path)
        mean, std = self.mean_alignment, self.std_alignment
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(
                ["beta", "mode", "mean_alignment", "std_alignment", "mean_lambda", "converged_fraction",
                 "theory_alpha", "theory_lambda", "feasible"]
            )
            for i, b in enumerate(self.betas):
                for k in range(mean.shape[1]):
                    w.writerow(
                        [repr(float(b)), k, repr(float(mean[i, k])), repr(float(std[i, k])),
                         repr(float(self.lambdas[i].mean())), repr(float(self.converged[i].mean())),
                         repr(float(self.theory_alpha[i, k])), repr(float(self.theory_lambda[i])),
                         int(self.feasible[i])]
                    )
        return path


def _symmetric_trial(order, dim, beta, restarts, tol, max_iters, seq):
    rng = np.random.default_rng(seq)
    model = SymmetricSpikedModel(order, dim, beta, random_unit_vector(dim, rng))
    a = model.generate(rng).tensor
    best = best_of_restarts(power_iteration_symmetric(a, random_unit_vector(dim, rng, restarts), max_iters, tol))
    return [abs(float(best.u @ model.x))], best.lam, best.converged


def _asymmetric_trial(dims, beta, restarts, tol, max_iters, seq):
    rng = np.random.default_rng(seq)
    model = AsymmetricSpikedModel(dims, beta, tuple(random_unit_vector(d, rng) for d in dims))
    a = model.generate(rng).tensor
    x0 = [random_unit_vector(d, rng, restarts) for d in dims]
    best = best_of_restarts(power_iteration_asymmetric(a, x0, max_iters, tol))
    return [abs(float(u @ x)) for u, x in zip(best.u, model.xs)], best.lam, best.converged


def alignment_sweep(
    family: str,
    betas,
    n_trials: int = 20,
    restarts: int = 10,
    seed=None,
    order: int = 3,
    dim: int = 20,
    dims=None,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
    workers: int = 1,
) -> SweepResult:
    """Mean best-of-restarts alignment per ``beta`` next to its prediction.

    Each ``(beta, trial)`` draws its planted vector(s), noise and starting
    vectors from its own child of ``SeedSequence(seed)``, so results do not
    depend on ``workers``.

    Parameters
    ----------
    family : {"symmetric", "asymmetric"}
    betas : array_like
    n_trials, restarts : int
    seed : int, optional
    order, dim : int
        Symmetric model size.
    dims : sequence of int
        Asymmetric model dims.
    tol, max_iters : power-iteration controls
    workers : int
        Thread count for trials.
    """
    betas = np.asarray(betas, dtype=float)
    if family not in ("symmetric", "asymmetric"):
        raise ArgumentError(f"family must be 'symmetric' or 'asymmetric', got {family!r}")
    if n_trials < 1 or restarts < 1:
        raise ArgumentError("n_trials and restarts must be positive")
    if family == "asymmetric":
        if dims is None:
            raise ArgumentError("asymmetric family needs dims")
        dims = tuple(int(d) for d in dims)
        n_modes = len(dims)
    else:
        n_modes = 1
    children = np.random.SeedSequence(seed).spawn(len(betas))
    jobs = []
    for b, child in zip(betas, children):
        for seq in child.spawn(n_trials):
            if family == "symmetric":
                jobs.append((_symmetric_trial, (order, dim, float(b), restarts, tol, max_iters, seq)))
            else:
                jobs.append((_asymmetric_trial, (dims, float(b), restarts, tol, max_iters, seq)))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda j: j[0](*j[1]), jobs))
    else:
        results = [fn(*args) for fn, args in jobs]
    shape = (len(betas), n_trials)
    align = np.array([r[0] for r in results]).reshape(shape + (n_modes,))
    lams = np.array([r[1] for r in results]).reshape(shape)
    conv = np.array([r[2] for r in results]).reshape(shape)

    t_alpha = np.zeros((len(betas), n_modes))
    t_lam = np.full(len(betas), np.nan)
    feas = np.zeros(len(betas), dtype=bool)
    t_res = np.full(len(betas), np.nan)
    for i, b in enumerate(betas):
        if b <= 0:
            continue
        p = symmetric_alignment_prediction(order, b) if family == "symmetric" else asymmetric_alignment_prediction(dims, b)
        t_alpha[i] = p.alpha
        t_lam[i], feas[i], t_res[i] = p.lam, p.feasible, p.residual
    return SweepResult(family, betas, align, lams, conv, t_alpha, t_lam, feas, t_res)


def _logistic(b, lo, hi, mid, width):
    return lo + (hi - lo) / (1 + np.exp(-(b - mid) / width))


def transition_beta(betas, alignment) -> float:
    """Midpoint of a logistic curve fitted to an alignment-versus-beta curve.

    Falls back to the first ``beta`` where the curve crosses halfway between
    its extremes if the fit fails.
    """
    betas = np.asarray(betas, dtype=float)
    y = np.asarray(alignment, dtype=float)
    lo, hi = float(y.min()), float(y.max())
    half = (lo + hi) / 2
    cross = float(betas[np.argmax(y >= half)])
    try:
        p, _ = curve_fit(
            _logistic, betas, y, p0=[lo, hi, cross, 0.1 * (betas.max() - betas.min())], maxfev=20000
        )
    except (RuntimeError, ValueError):
        return cross
    mid = float(p[2])
    if not betas.min() <= mid <= betas.max():
        return cross
    return mid
