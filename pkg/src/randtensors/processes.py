"""Tensor random sequences, multilinear time-invariant (MLTI) filtering and spectra.

A sequence is stored as an array whose first axis is the discrete index
``k`` (offset by ``start``); an ensemble of independent realizations adds a
leading realization axis. Outside the stored support every sequence is the
zero tensor, so convolution is linear (never circular).

Correlations follow the uncentered convention ``R_X[i] = E[X[k] o X*[k-i]]``
and ``R_YX[i] = E[Y[k] o X*[k-i]]``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from math import prod
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ArgumentError, ShapeError
from .random_gaussian import correlation_sqrt
from .tensor_core import einstein_product, hermitian_transpose, identity_tensor, validate_shape, vec

__all__ = [
    "TensorSequence",
    "SequenceEnsemble",
    "MLTIFilter",
    "CorrelationSequence",
    "Spectrum",
    "InputSpec",
    "contracted_convolution",
    "generate_input",
    "estimate_autocorrelation",
    "estimate_crosscorrelation",
    "wss_output_autocorrelation",
    "wss_cross_correlation",
    "default_grid",
    "psd",
    "pcd",
    "filter_dft",
    "WSSReport",
    "SpectralReport",
    "verify_wss_filter_relations",
    "verify_spectral_relations",
    "write_correlation_csv",
    "write_spectrum_csv",
]


@dataclass(frozen=True)
class TensorSequence:
    """Finite-support tensor sequence ``x[k]``, ``k = start .. start + len - 1``."""

    values: np.ndarray
    start: int = 0

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim < 2:
            raise ShapeError("values must have shape (length, *tensor_shape)")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "start", int(self.start))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape[1:]

    @property
    def stop(self) -> int:
        """Last index of the support (inclusive)."""
        return self.start + self.values.shape[0] - 1

    def __getitem__(self, k: int) -> np.ndarray:
        j = int(k) - self.start
        if 0 <= j < self.values.shape[0]:
            return self.values[j]
        return np.zeros(self.shape, dtype=self.values.dtype)

    @classmethod
    def delta(cls, tensor: np.ndarray, at: int = 0) -> "TensorSequence":
        return cls(np.asarray(tensor)[None], at)


@dataclass(frozen=True)
class SequenceEnsemble:
    """Independent realizations of a sequence, ``values`` of shape (R, length, *shape)."""

    values: np.ndarray
    start: int = 0

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim < 3:
            raise ShapeError("values must have shape (realizations, length, *tensor_shape)")
        if v.shape[0] < 1:
            raise ArgumentError("an ensemble needs at least one realization")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "start", int(self.start))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape[2:]

    @property
    def stop(self) -> int:
        return self.start + self.values.shape[1] - 1

    @property
    def n_realizations(self) -> int:
        return self.values.shape[0]

    def realization(self, r: int) -> TensorSequence:
        return TensorSequence(self.values[r], self.start)

    @classmethod
    def from_sequences(cls, seqs: Sequence[TensorSequence]) -> "SequenceEnsemble":
        seqs = list(seqs)
        if not seqs:
            raise ArgumentError("no realizations given")
        lo, hi = min(s.start for s in seqs), max(s.stop for s in seqs)
        shapes = {s.shape for s in seqs}
        if len(shapes) != 1:
            raise ShapeError(f"realizations have differing shapes {sorted(shapes)}")
        dtype = np.result_type(*[s.values for s in seqs])
        out = np.zeros((len(seqs), hi - lo + 1) + seqs[0].shape, dtype=dtype)
        for r, s in enumerate(seqs):
            out[r, s.start - lo:s.stop - lo + 1] = s.values
        return cls(out, lo)


@dataclass(frozen=True)
class MLTIFilter:
    """Impulse response ``H[k]`` of shape ``J + I``; ``n_contract = len(I)``."""

    taps: TensorSequence
    n_contract: int

    def __post_init__(self):
        if not 1 <= self.n_contract < len(self.taps.shape):
            raise ShapeError(f"cannot contract {self.n_contract} modes of an order-{len(self.taps.shape)} impulse response")

    @property
    def input_shape(self) -> tuple[int, ...]:
        return self.taps.shape[len(self.taps.shape) - self.n_contract:]

    @property
    def output_shape(self) -> tuple[int, ...]:
        return self.taps.shape[: len(self.taps.shape) - self.n_contract]

    @property
    def start(self) -> int:
        return self.taps.start

    @property
    def stop(self) -> int:
        return self.taps.stop

    @classmethod
    def identity(cls, shape: Sequence[int]) -> "MLTIFilter":
        shape = validate_shape(shape)
        return cls(TensorSequence.delta(identity_tensor(shape)), len(shape))

    @classmethod
    def random(cls, shape: Sequence[int], n_taps: int, seed=None, out_shape: Sequence[int] | None = None) -> "MLTIFilter":
        """Circular complex taps scaled so the output power is of order one."""
        shape = validate_shape(shape)
        out_shape = shape if out_shape is None else validate_shape(out_shape)
        rng = np.random.default_rng(seed)
        full = (n_taps,) + out_shape + shape
        taps = (rng.standard_normal(full) + 1j * rng.standard_normal(full)) / np.sqrt(2 * n_taps * prod(shape))
        return cls(TensorSequence(taps, 0), len(shape))


@dataclass(frozen=True)
class CorrelationSequence:
    """Correlation tensors ``values[j] = R[lags[j]]`` of shape ``S1 + S2``."""

    lags: np.ndarray
    values: np.ndarray
    n_row: int

    def at(self, lag: int) -> np.ndarray:
        hit = np.flatnonzero(self.lags == lag)
        if hit.size:
            return self.values[hit[0]]
        return np.zeros(self.values.shape[1:], dtype=self.values.dtype)


@dataclass(frozen=True)
class Spectrum:
    """Order-2N tensors ``values[j] = S[freqs[j]]``."""

    freqs: np.ndarray
    values: np.ndarray
    n_row: int


@dataclass(frozen=True)
class InputSpec:
    """Gaussian input sequence, independent over ``k``.

    ``correlation`` is the per-index covariance ``C`` (identity when
    omitted) and ``mean`` a constant mean tensor. A nonzero ``time_scale``
    multiplies the entries at index ``k`` by ``sqrt(1 + time_scale * k)``,
    which makes the input non-stationary.
    """

    shape: tuple
    correlation: np.ndarray | None = None
    mean: np.ndarray | None = None
    time_scale: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "shape", validate_shape(self.shape))
        if self.correlation is not None and np.shape(self.correlation) != self.shape * 2:
            raise ShapeError(f"correlation must have shape {self.shape * 2}")
        if self.mean is not None and np.shape(self.mean) != self.shape:
            raise ShapeError(f"mean must have shape {self.shape}")

    @property
    def is_wss(self) -> bool:
        return self.time_scale == 0

    @property
    def covariance(self) -> np.ndarray:
        return identity_tensor(self.shape) if self.correlation is None else np.asarray(self.correlation)

    @property
    def mean_tensor(self) -> np.ndarray:
        return np.zeros(self.shape) if self.mean is None else np.asarray(self.mean)

    def autocorrelation(self, lags: Sequence[int]) -> CorrelationSequence:
        """Population ``R_X[i] = C delta[i] + M o M*`` (WSS inputs only)."""
        if not self.is_wss:
            raise ArgumentError("a non-stationary input has no lag-only autocorrelation")
        lags = np.asarray(lags, dtype=int)
        m = self.mean_tensor
        mm = np.multiply.outer(m, np.conj(m))
        vals = np.stack([mm + (self.covariance if i == 0 else 0) for i in lags]).astype(complex)
        return CorrelationSequence(lags, vals, len(self.shape))


def _convolve_array(taps: np.ndarray, n: int, x: np.ndarray, time_axis: int) -> np.ndarray:
    # y[k] = sum_t H[t] *_n x[k - t] along time_axis of x; x carries tensor modes last
    lx = x.shape[time_axis]
    lh = taps.shape[0]
    x_modes = list(range(x.ndim - n, x.ndim))
    h_modes = list(range(taps.ndim - n, taps.ndim))
    lead = x.shape[:time_axis]
    out_shape = lead + (lx + lh - 1,) + taps.shape[1: taps.ndim - n]
    y = np.zeros(out_shape, dtype=np.result_type(taps, x))
    for t in range(lh):
        contrib = np.tensordot(x, taps[t], axes=(x_modes, [m - 1 for m in h_modes]))
        idx = (slice(None),) * time_axis + (slice(t, t + lx),)
        y[idx] += contrib
    return y


def contracted_convolution(f: MLTIFilter, x):
    """``y[k] = sum_n H[n] *_N x[k - n]`` for a sequence or an ensemble.

    The support of ``y`` is the Minkowski sum of the supports of ``H`` and ``x``.
    """
    if x.shape != f.input_shape:
        raise ShapeError(f"filter expects input shape {f.input_shape}, got {x.shape}")
    if isinstance(x, SequenceEnsemble):
        y = _convolve_array(f.taps.values, f.n_contract, x.values, 1)
        return SequenceEnsemble(y, f.start + x.start)
    y = _convolve_array(f.taps.values, f.n_contract, x.values, 0)
    return TensorSequence(y, f.start + x.start)


def generate_input(spec: InputSpec, length: int, n_realizations: int, seed=None, start: int = 0) -> SequenceEnsemble:
    """Draw ``n_realizations`` independent input sequences of the given length.

    Realization ``r`` uses its own generator spawned from ``seed``, so the
    first ``r`` realizations do not depend on how many are requested.
    ``seed`` may be an int, a ``SeedSequence`` or a ``Generator``.
    """
    if length < 1 or n_realizations < 1:
        raise ArgumentError("length and n_realizations must be positive")
    shape = spec.shape
    if isinstance(seed, np.random.Generator):
        seed = int(seed.integers(2**63))
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    # same children as a fresh seq.spawn, without advancing seq
    children = [
        np.random.SeedSequence(seq.entropy, spawn_key=seq.spawn_key + (r,), pool_size=seq.pool_size)
        for r in range(n_realizations)
    ]
    b = np.empty((n_realizations, length) + shape, dtype=complex)
    for r, child in enumerate(children):
        rng = np.random.default_rng(child)
        b[r] = (rng.standard_normal((length,) + shape) + 1j * rng.standard_normal((length,) + shape)) / np.sqrt(2)
    n = len(shape)
    if spec.correlation is not None:
        c = correlation_sqrt(spec.covariance)
        b = np.tensordot(b, c, axes=(list(range(2, 2 + n)), list(range(n, 2 * n))))
    if spec.time_scale:
        k = start + np.arange(length)
        scale = np.sqrt(1 + spec.time_scale * k)
        b = b * scale.reshape((1, length) + (1,) * n)
    b = b + spec.mean_tensor
    return SequenceEnsemble(b, start)


def _as_ensemble(x) -> SequenceEnsemble:
    if isinstance(x, SequenceEnsemble):
        return x
    if isinstance(x, TensorSequence):
        return SequenceEnsemble(x.values[None], x.start)
    return SequenceEnsemble.from_sequences(x)


def _outer_mean(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # mean over the leading axis of a o conj(b)
    p = a.shape[0]
    m = a.reshape(p, -1).T @ np.conj(b.reshape(p, -1)) / p
    return m.reshape(a.shape[1:] + b.shape[1:])


def _correlate(y: SequenceEnsemble, x: SequenceEnsemble, lags, mode, window, anchor, center) -> CorrelationSequence:
    if y.n_realizations != x.n_realizations:
        raise ArgumentError("both ensembles need the same number of realizations")
    lags = np.asarray(list(lags), dtype=int)
    if lags.size == 0:
        raise ArgumentError("no lags requested")
    if mode not in ("wss", "ensemble"):
        raise ArgumentError(f"mode must be 'wss' or 'ensemble', got {mode!r}")
    yv, xv = y.values, x.values
    if center:
        yv = yv - yv.mean(axis=0)
        xv = xv - xv.mean(axis=0)

    def at(v, start, k):
        j = k - start
        if 0 <= j < v.shape[1]:
            return v[:, j]
        return np.zeros((v.shape[0],) + v.shape[2:], dtype=v.dtype)

    out = []
    if mode == "ensemble":
        if anchor is None:
            raise ArgumentError("ensemble mode needs an anchor index k")
        for i in lags:
            out.append(_outer_mean(at(yv, y.start, anchor), at(xv, x.start, anchor - i)))
    else:
        lo, hi = window if window is not None else (max(y.start, x.start), min(y.stop, x.stop))
        for i in lags:
            ks = np.arange(max(lo, lo + i), min(hi, hi + i) + 1)
            if ks.size == 0:
                raise ArgumentError(f"lag {i} leaves no index pairs inside the window {lo}..{hi}")
            a = yv[:, ks - y.start]
            b = xv[:, ks - i - x.start]
            a = a.reshape((-1,) + a.shape[2:])
            b = b.reshape((-1,) + b.shape[2:])
            out.append(_outer_mean(a, b))
    return CorrelationSequence(lags, np.stack(out), len(y.shape))


def estimate_crosscorrelation(
    y, x, lags: Sequence[int], mode: str = "wss", window: tuple[int, int] | None = None,
    anchor: int | None = None, center: bool = False,
) -> CorrelationSequence:
    """Estimate ``R_YX[i] = E[Y[k] o X*[k - i]]``.

    Parameters
    ----------
    y, x : SequenceEnsemble, TensorSequence or list of TensorSequence
        Realizations; the r-th realization of ``y`` pairs with that of ``x``.
    lags : sequence of int
    mode : {"wss", "ensemble"}
        ``"wss"`` averages over realizations and over every ``k`` with both
        ``k`` and ``k - i`` inside ``window``; ``"ensemble"`` averages over
        realizations only, at ``k = anchor``.
    window : (int, int), optional
        Inclusive index range for the ergodic average. Defaults to the
        common support.
    center : bool
        Subtract the ensemble mean at every ``k`` first.
    """
    return _correlate(_as_ensemble(y), _as_ensemble(x), lags, mode, window, anchor, center)


def estimate_autocorrelation(
    x, lags: Sequence[int], mode: str = "wss", window: tuple[int, int] | None = None,
    anchor: int | None = None, center: bool = False,
) -> CorrelationSequence:
    """Estimate ``R_X[i] = E[X[k] o X*[k - i]]``; see :func:`estimate_crosscorrelation`.

    In ``"wss"`` mode the Hermitian lag symmetry ``R[-i] = R[i]^H`` is
    enforced by averaging each estimate with the conjugate-transposed
    estimate at the opposite lag.
    """
    x = _as_ensemble(x)
    lags = np.asarray(list(lags), dtype=int)
    if mode != "wss":
        return _correlate(x, x, lags, mode, window, anchor, center)
    both = np.union1d(lags, -lags)
    est = _correlate(x, x, both, mode, window, anchor, center)
    n = len(x.shape)
    vals = []
    for i in lags:
        a = est.values[np.flatnonzero(both == i)[0]]
        b = est.values[np.flatnonzero(both == -i)[0]]
        vals.append((a + hermitian_transpose(b, n)) / 2)
    return CorrelationSequence(lags, np.stack(vals), n)


def _dagger(h: np.ndarray, n_out: int) -> np.ndarray:
    return hermitian_transpose(h, n_out)


def wss_output_autocorrelation(f: MLTIFilter, r_x: CorrelationSequence, lags: Sequence[int], mean=None) -> CorrelationSequence:
    """``R_Y[i] = sum_n sum_m H[n] *_N R_X[m + i - n] *_N H^H[m]`` by direct double sum.

    ``r_x`` holds the finite-support part of the input autocorrelation. A
    constant part ``M o M*`` from a mean ``M`` has infinite support; its
    image is added in closed form as ``(Hs *_N M) o (Hs *_N M)*`` with
    ``Hs = sum_n H[n]``.
    """
    n = f.n_contract
    m_out = len(f.output_shape)
    taps = range(f.start, f.stop + 1)
    out = []
    for i in lags:
        acc = np.zeros(f.output_shape * 2, dtype=complex)
        for a in taps:
            ha = f.taps[a]
            for b in taps:
                r = r_x.at(b + i - a)
                if np.any(r):
                    acc += einstein_product(einstein_product(ha, r, n), _dagger(f.taps[b], m_out), n)
        out.append(acc)
    vals = np.stack(out)
    if mean is not None:
        hm = einstein_product(sum(f.taps[a] for a in taps), np.asarray(mean), n)
        vals = vals + np.multiply.outer(hm, np.conj(hm))
    return CorrelationSequence(np.asarray(lags, dtype=int), vals, m_out)


def wss_cross_correlation(f: MLTIFilter, r_x: CorrelationSequence, lags: Sequence[int], mean=None) -> CorrelationSequence:
    """``R_YX[i] = sum_n H[n] *_N R_X[i - n]`` by direct sum, plus the mean term."""
    n = f.n_contract
    out = []
    for i in lags:
        acc = np.zeros(f.output_shape + f.input_shape, dtype=complex)
        for a in range(f.start, f.stop + 1):
            r = r_x.at(i - a)
            if np.any(r):
                acc += einstein_product(f.taps[a], r, n)
        out.append(acc)
    vals = np.stack(out)
    if mean is not None:
        taps = range(f.start, f.stop + 1)
        hm = einstein_product(sum(f.taps[a] for a in taps), np.asarray(mean), n)
        vals = vals + np.multiply.outer(hm, np.conj(mean))
    return CorrelationSequence(np.asarray(lags, dtype=int), vals, len(f.output_shape))


def default_grid(n: int = 64) -> np.ndarray:
    """``n`` uniform frequencies in [-1/2, 1/2)."""
    if n < 1:
        raise ArgumentError("grid needs at least one point")
    return -0.5 + np.arange(n) / n


def _dft(lags: np.ndarray, values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    phase = np.exp(-2j * np.pi * np.outer(grid, lags))
    return np.tensordot(phase, values, axes=(1, 0))


def psd(r: CorrelationSequence, grid=None) -> Spectrum:
    """``S[f] = sum_i R[i] exp(-j 2 pi f i)`` by direct summation on ``grid``."""
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    return Spectrum(grid, _dft(r.lags, r.values, grid), r.n_row)


def pcd(r_yx: CorrelationSequence, grid=None) -> Spectrum:
    """Power cross-spectrum density; the same transform applied to a cross-correlation."""
    return psd(r_yx, grid)


def filter_dft(f: MLTIFilter, grid=None) -> Spectrum:
    """Frequency response ``H(f) = sum_n H[n] exp(-j 2 pi f n)``."""
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    lags = np.arange(f.start, f.stop + 1)
    return Spectrum(grid, _dft(lags, f.taps.values, grid), len(f.output_shape))


def _max_frob(a: np.ndarray, b: np.ndarray) -> float:
    d = (a - b).reshape(a.shape[0], -1)
    return float(np.max(np.linalg.norm(d, axis=1)))


@dataclass(frozen=True)
class WSSReport:
    lags: np.ndarray
    r_y_empirical: CorrelationSequence
    r_y_theory: CorrelationSequence
    r_yx_empirical: CorrelationSequence
    r_yx_theory: CorrelationSequence
    r_y_error: float
    r_yx_error: float
    mean_deviation: float
    anchor_deviation: float
    n_realizations: int
    window: tuple


@dataclass(frozen=True)
class SpectralReport:
    grid: np.ndarray
    s_x: Spectrum
    s_y: Spectrum
    s_yx: Spectrum
    h: Spectrum
    s_y_error: float
    s_yx_error: float
    s_y_theory_error: float
    extras: dict = field(default_factory=dict)


def _simulate(f: MLTIFilter, spec: InputSpec, n_realizations: int, seed, length: int | None):
    if not spec.is_wss:
        raise ArgumentError("input spec is not wide-sense stationary (nonzero time_scale)")
    if spec.shape != f.input_shape:
        raise ShapeError(f"filter expects input shape {f.input_shape}, input spec has {spec.shape}")
    n_taps = f.stop - f.start + 1
    length = max(64, 4 * n_taps) if length is None else int(length)
    x = generate_input(spec, length, n_realizations, seed)
    y = contracted_convolution(f, x)
    # indices where every tap sees input: the output is in its stationary regime there
    window = (x.start + f.stop, x.stop + f.start)
    if window[1] - window[0] < 2 * n_taps:
        raise ArgumentError("sequence too short for the filter length")
    return x, y, window


def verify_wss_filter_relations(
    f: MLTIFilter, spec: InputSpec, n_realizations: int, seed=None, lags=None, length: int | None = None,
) -> WSSReport:
    """Compare empirical output auto- and cross-correlations with their lag formulas.

    Realizations of the input are filtered, correlations are estimated with
    the ergodic estimator over the stationary part of the output, and
    compared with :func:`wss_output_autocorrelation` and
    :func:`wss_cross_correlation` evaluated on the population input
    correlation. Errors are the largest Frobenius deviation over ``lags``.
    The cross-correlation is also estimated in ensemble mode at two anchors
    to confirm it depends on the lag only.
    """
    x, y, window = _simulate(f, spec, n_realizations, seed, length)
    n_taps = f.stop - f.start + 1
    lags = np.arange(-n_taps, n_taps + 1) if lags is None else np.asarray(lags, dtype=int)
    # finite-support part of R_X; the mean enters the formulas separately
    r_x = InputSpec(spec.shape, spec.correlation).autocorrelation([0])
    mean = None if spec.mean is None else spec.mean_tensor
    ry_t = wss_output_autocorrelation(f, r_x, lags, mean)
    ryx_t = wss_cross_correlation(f, r_x, lags, mean)
    ry_e = estimate_autocorrelation(y, lags, window=window)
    ryx_e = estimate_crosscorrelation(y, x, lags, window=window)
    ymean = y.values[:, window[0] - y.start: window[1] - y.start + 1].mean(axis=0)
    target = np.zeros(f.output_shape) if mean is None else einstein_product(sum(f.taps[a] for a in range(f.start, f.stop + 1)), mean, f.n_contract)
    mean_dev = _max_frob(ymean, np.broadcast_to(target, ymean.shape))
    a1 = window[0] + n_taps
    a2 = window[1] - n_taps
    e1 = estimate_crosscorrelation(y, x, lags, mode="ensemble", anchor=a1)
    e2 = estimate_crosscorrelation(y, x, lags, mode="ensemble", anchor=a2)
    return WSSReport(
        lags=lags,
        r_y_empirical=ry_e,
        r_y_theory=ry_t,
        r_yx_empirical=ryx_e,
        r_yx_theory=ryx_t,
        r_y_error=_max_frob(ry_e.values, ry_t.values),
        r_yx_error=_max_frob(ryx_e.values, ryx_t.values),
        mean_deviation=mean_dev,
        anchor_deviation=_max_frob(e1.values, e2.values),
        n_realizations=n_realizations,
        window=window,
    )


def verify_spectral_relations(
    f: MLTIFilter, spec: InputSpec, grid=None, n_realizations: int = 1000, seed=None,
    max_lag: int | None = None, length: int | None = None,
) -> SpectralReport:
    """Check ``S_Y = H *_N S_X *_N H^H`` and ``S_YX = H *_N S_X`` on a frequency grid.

    ``S_X``, ``S_Y`` and ``S_YX`` are transforms of correlations estimated
    from centered realizations over lags ``|i| <= max_lag`` (default: the
    filter length minus one), so a constant mean does not produce a
    spectral line. ``s_y_theory_error`` compares the estimated ``S_Y`` with
    ``H S_X H^H`` built from the population input covariance.
    """
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    x, y, window = _simulate(f, spec, n_realizations, seed, length)
    n_taps = f.stop - f.start + 1
    max_lag = n_taps - 1 if max_lag is None else int(max_lag)
    lags = np.arange(-max_lag, max_lag + 1)
    center = spec.mean is not None
    rx = estimate_autocorrelation(x, lags, window=window, center=center)
    ry = estimate_autocorrelation(y, lags, window=window, center=center)
    ryx = estimate_crosscorrelation(y, x, lags, window=window, center=center)
    s_x, s_y, s_yx = psd(rx, grid), psd(ry, grid), pcd(ryx, grid)
    h = filter_dft(f, grid)
    n, m_out = f.n_contract, len(f.output_shape)
    hs = [einstein_product(hf, sf, n) for hf, sf in zip(h.values, s_x.values)]
    rhs_y = np.stack([einstein_product(a, _dagger(hf, m_out), n) for a, hf in zip(hs, h.values)])
    rhs_yx = np.stack(hs)
    s_pop = psd(InputSpec(spec.shape, spec.correlation).autocorrelation([0]), grid)
    pop = np.stack(
        [einstein_product(einstein_product(hf, sf, n), _dagger(hf, m_out), n) for hf, sf in zip(h.values, s_pop.values)]
    )
    return SpectralReport(
        grid=grid,
        s_x=s_x,
        s_y=s_y,
        s_yx=s_yx,
        h=h,
        s_y_error=_max_frob(s_y.values, rhs_y),
        s_yx_error=_max_frob(s_yx.values, rhs_yx),
        s_y_theory_error=_max_frob(s_y.values, pop),
    )


def _flat_rows(key, values: np.ndarray):
    for k, v in zip(key, values):
        flat = vec(v)
        for idx, z in enumerate(flat):
            yield k, idx, float(np.real(z)), float(np.imag(z))


def write_correlation_csv(path, r: CorrelationSequence) -> Path:
    """Rows ``lag_samples, index, real, imag``; ``index`` is the column-major flat index."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lag_samples", "index", "real", "imag"])
        for lag, idx, re, im in _flat_rows(r.lags, r.values):
            w.writerow([int(lag), idx, repr(re), repr(im)])
    return path


def write_spectrum_csv(path, s: Spectrum) -> Path:
    """Rows ``freq_cycles_per_sample, index, real, imag``; ``index`` is the column-major flat index."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["freq_cycles_per_sample", "index", "real", "imag"])
        for f, idx, re, im in _flat_rows(s.freqs, s.values):
            w.writerow([repr(float(f)), idx, repr(re), repr(im)])
    return path
