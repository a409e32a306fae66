"""Config-driven experiment drivers.

Each driver takes a validated :class:`~randtensors.config.ExperimentConfig`,
writes CSV tables and SVG figures into a run directory and returns a
summary dict. :func:`execute` wraps a driver with the run manifest.
All randomness derives from the config seed, so a (config, seed) pair
always produces the same data files.
"""

from __future__ import annotations

import csv
import time
from datetime import datetime, timezone
from math import prod
from pathlib import Path

import numpy as np

from . import __version__, plotting
from .config import ExperimentConfig, grid_values
from .manifest import FileRecord, RunManifest
from .processes import (
    InputSpec,
    MLTIFilter,
    default_grid,
    psd,
    verify_spectral_relations,
    verify_wss_filter_relations,
    write_correlation_csv,
    write_spectrum_csv,
    wss_output_autocorrelation,
)
from .random_gaussian import (
    SeparableCorrelation,
    build_mode_restricted_correlation,
    estimate_correlation,
    estimate_moments,
    kronecker_counterexample_check,
    propriety_statistic,
    sample_correlated,
    sample_separable,
    separable_to_full,
    unit_correlation_matrix,
    verify_lemma1,
)
from .spectral import (
    empirical_spectrum_hermitian,
    empirical_spectrum_rectangular,
    histogram_with_limit,
    ks_distance,
    marcenko_pastur_cdf,
    marcenko_pastur_density,
    marcenko_pastur_edges,
    semicircle_cdf,
    semicircle_density,
)
from .spiked import alignment_sweep, transition_beta
from .tensor_core import identity_tensor, matricize
from .tensorio import read_tensor, write_matricized_csv, write_tensor

__all__ = ["DRIVERS", "execute", "write_table"]


def write_table(path, header, rows) -> Path:
    """CSV with a header row; floats are written with ``repr`` so they round-trip."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def _summary_csv(path, summary: dict) -> Path:
    return write_table(path, ["metric", "value"], sorted(summary.items()))


def _toeplitz_tensor(dims, rho) -> np.ndarray:
    # separable correlation with a unit Toeplitz factor rho^|i-j| on every mode
    return separable_to_full(SeparableCorrelation([unit_correlation_matrix(rho, d) for d in dims]))


def _sample(cfg: ExperimentConfig, out: Path, stamp: str) -> dict:
    p = cfg.params
    shape, n = tuple(p["shape"]), p["n_samples"]
    if p["structure"] == "identity":
        r = identity_tensor(shape).astype(complex)
        x = sample_correlated(r, seed=cfg.seed, size=n, flavor=p["flavor"])
    elif p["structure"] == "mode_restricted":
        blocks = [unit_correlation_matrix(p["rho"], shape[m]) for m in p["modes"]]
        r = build_mode_restricted_correlation(shape, p["modes"], blocks)
        x = sample_correlated(r.real if p["flavor"] == "real" else r, seed=cfg.seed, size=n, flavor=p["flavor"])
    else:
        s = SeparableCorrelation([unit_correlation_matrix(p["rho"], d) for d in shape])
        r = separable_to_full(s)
        x = sample_separable(s, seed=cfg.seed, size=n, flavor=p["flavor"])
    if p["flavor"] == "real":
        r = r.real
    r_hat = estimate_correlation(x)
    order = len(shape)
    off = np.abs(r) == 0
    summary = {
        "relative_error": float(np.linalg.norm(r_hat - r) / np.linalg.norm(r)),
        "off_support_max": float(np.max(np.abs(r_hat[off]), initial=0.0)),
        "off_support_bound": 3 / np.sqrt(n),
        "support_size": int(np.count_nonzero(~off)),
        "n_samples": n,
    }
    write_matricized_csv(out / "correlation_true.csv", r, order)
    write_matricized_csv(out / "correlation_estimate.csv", r_hat, order)
    if p["save_samples"]:
        write_tensor(out / "samples.rtns", x)
    plotting.heatmaps(
        [("true |R|", matricize(r, order)), ("estimated |R|", matricize(r_hat, order))],
        out / "correlation.svg", stamp, title=f"correlation support, shape {list(shape)}",
    )
    return summary


def _moments(cfg: ExperimentConfig, out: Path, stamp: str) -> dict:
    p = cfg.params
    theory = None
    if p["input"]:
        x = read_tensor(p["input"])
        shape = x.shape[1:]
    else:
        shape = tuple(p["shape"])
        r = _toeplitz_tensor(shape, p["rho"]).real
        z = sample_separable(SeparableCorrelation([unit_correlation_matrix(p["rho"], d).real for d in shape]), seed=cfg.seed, size=p["n_samples"])
        x = p["mean"] + z + p["kappa"] * np.conj(z)
        # real symmetric R: Q = (1 + kappa^2) R and Q~ = 2 kappa R
        theory = (np.full(shape, p["mean"], dtype=complex), (1 + p["kappa"] ** 2) * r, 2 * p["kappa"] * r)
    est = estimate_moments(x)
    order = len(shape)
    summary = {
        "n_samples": est.n_samples,
        "propriety_estimate": propriety_statistic(est.cov, est.pseudo_cov),
    }
    panels = [("|Q| estimate", matricize(est.cov, order)), ("|Q~| estimate", matricize(est.pseudo_cov, order))]
    if theory is not None:
        m, q, pq = theory
        summary.update(
            mean_error=float(np.linalg.norm(est.mean - m)),
            cov_relative_error=float(np.linalg.norm(est.cov - q) / np.linalg.norm(q)),
            pseudo_cov_error=float(np.linalg.norm(est.pseudo_cov - pq)),
            propriety_theory=propriety_statistic(q, pq),
        )
        panels += [("|Q| theory", matricize(q, order)), ("|Q~| theory", matricize(pq, order))]
    write_matricized_csv(out / "covariance_estimate.csv", est.cov, order)
    write_matricized_csv(out / "pseudo_covariance_estimate.csv", est.pseudo_cov, order)
    write_table(out / "mean_estimate.csv", ["index", "real", "imag"],
                [(i, float(v.real), float(v.imag)) for i, v in enumerate(np.ravel(est.mean, order="F"))])
    plotting.heatmaps(panels, out / "moments.svg", stamp, title="second-order moments")
    return summary


def _lemma1(cfg: ExperimentConfig, out: Path, stamp: str) -> dict:
    p = cfg.params
    g_r = _toeplitz_tensor(p["receive_dims"], p["rho_receive"])
    g_t = _toeplitz_tensor(p["transmit_dims"], p["rho_transmit"])
    rep = verify_lemma1(g_r, g_t, p["n_samples"], seed=cfg.seed)
    rows = [("transmit_at_receive", j, float(d)) for j, d in enumerate(rep.per_index_transmit)]
    rows += [("receive_at_transmit", i, float(d)) for i, d in enumerate(rep.per_index_receive)]
    write_table(out / "uniformity.csv", ["correlation", "fixed_index", "frobenius_deviation"], rows)
    plotting.bar_figure(
        [f"{'T' if r[0][0] == 't' else 'R'}@{r[1]}" for r in rows], [r[2] for r in rows],
        out / "uniformity.svg", stamp, ylabel="Frobenius deviation", threshold=p["tolerance"],
        title="per-index correlation uniformity",
    )
    return {
        "transmit_deviation": rep.transmit_deviation,
        "receive_deviation": rep.receive_deviation,
        "uniformity_deviation": rep.uniformity_deviation,
        "pseudo_diagonal_deviation": rep.pseudo_diagonal_deviation,
        "tolerance": p["tolerance"],
        "passed": int(rep.uniformity_deviation <= p["tolerance"]),
        "n_samples": rep.n_samples,
    }


def _matrix_rows(m):
    return [(r + 1, c + 1, float(m[r, c].real), float(m[r, c].imag)) for r in range(m.shape[0]) for c in range(m.shape[1])]


def _kronecker(cfg: ExperimentConfig, out: Path, stamp: str) -> dict:
    p = cfg.params
    rep = kronecker_counterexample_check(p["rho"], p["mu"], p["nu"], p["gamma"], n_samples=p["n_samples"], seed=cfg.seed)
    header = ["row", "col", "real", "imag"]
    write_table(out / "r_mimo.csv", header, _matrix_rows(rep.r_mimo))
    write_table(out / "r_kron.csv", header, _matrix_rows(rep.r_kron))
    write_table(
        out / "differing_entries.csv", ["row", "col", "r_mimo_real", "r_mimo_imag", "r_kron_real", "r_kron_imag"],
        [(a, b, u.real, u.imag, v.real, v.imag) for a, b, u, v in rep.differing_entries],
    )
    plotting.heatmaps(
        [("R_MIMO", rep.r_mimo), ("R_T kron R_R", rep.r_kron), ("difference", rep.r_mimo - rep.r_kron)],
        out / "kronecker.svg", stamp, title="channel correlation vs Kronecker model",
    )
    summary = {
        "min_eigenvalue": rep.min_eigenvalue,
        "uniform": int(rep.uniform),
        "kron_gap": rep.kron_gap,
        "n_differing_entries": len(rep.differing_entries),
    }
    if rep.empirical_deviation is not None:
        summary["empirical_deviation"] = rep.empirical_deviation
    return summary


def _process(cfg: ExperimentConfig, out: Path, stamp: str) -> dict:
    p = cfg.params
    shape = tuple(p["shape"])
    corr = _toeplitz_tensor(shape, p["rho"]) if p["rho"] else None
    mean = np.full(shape, p["mean"], dtype=complex) if p["mean"] else None
    spec = InputSpec(shape, correlation=corr, mean=mean)
    grid = default_grid(p["grid"])
    lags = np.arange(-p["max_lag"], p["max_lag"] + 1)
    length = p["length"] or None
    seeds = np.random.SeedSequence(cfg.seed).spawn(2 * p["n_filters"])
    summary, rows = {}, []
    for k in range(p["n_filters"]):
        f = MLTIFilter.random(shape, p["n_taps"], seed=np.random.default_rng(seeds[2 * k]))
        run_seed = seeds[2 * k + 1]
        wss = verify_wss_filter_relations(f, spec, p["n_realizations"], seed=run_seed, lags=lags, length=length)
        sp = verify_spectral_relations(f, spec, grid, p["n_realizations"], seed=run_seed, max_lag=p["max_lag"], length=length)
        rows.append((k, wss.r_y_error, wss.r_yx_error, wss.mean_deviation, sp.s_y_error, sp.s_yx_error, sp.s_y_theory_error))
        write_correlation_csv(out / f"r_y_empirical_{k}.csv", wss.r_y_empirical)
        write_correlation_csv(out / f"r_y_theory_{k}.csv", wss.r_y_theory)
        write_correlation_csv(out / f"r_yx_empirical_{k}.csv", wss.r_yx_empirical)
        write_correlation_csv(out / f"r_yx_theory_{k}.csv", wss.r_yx_theory)
        write_spectrum_csv(out / f"s_y_empirical_{k}.csv", sp.s_y)
        if k == 0:
            r_x = InputSpec(shape, corr).autocorrelation([0])
            full = np.arange(-(p["n_taps"] - 1), p["n_taps"])
            s_pop = psd(wss_output_autocorrelation(f, r_x, full), grid)
            n = len(shape)
            trace = [np.trace(matricize(v, n)).real for v in sp.s_y.values]
            trace_pop = [np.trace(matricize(v, n)).real for v in s_pop.values]
            plotting.line_figure(
                grid, [("empirical", trace, "-"), ("H S_X H^H", trace_pop, "--")], out / "output_psd.svg", stamp,
                xlabel="frequency (cycles/sample)", ylabel="trace of S_Y", title="output power spectral density",
            )
    write_table(
        out / "errors.csv",
        ["filter", "r_y_error", "r_yx_error", "mean_deviation", "s_y_error", "s_yx_error", "s_y_theory_error"], rows,
    )
    arr = np.array([r[1:] for r in rows])
    for j, name in enumerate(["r_y_error", "r_yx_error", "mean_deviation", "s_y_error", "s_yx_error", "s_y_theory_error"]):
        summary[f"max_{name}"] = float(arr[:, j].max())
    summary["n_realizations"] = p["n_realizations"]
    return summary


def _spectrum(cfg: ExperimentConfig, out: Path, stamp: str) -> dict:
    p = cfg.params
    if p["law"] == "semicircle":
        spec = empirical_spectrum_hermitian(p["dims"], p["n_trials"], cfg.seed, workers=cfg.workers)
        cdf, dens, bounds = semicircle_cdf, semicircle_density, (-2.0, 2.0)
        label, size = "eigenvalue", f"{prod(p['dims'])}x{prod(p['dims'])}"
    else:
        spec = empirical_spectrum_rectangular(p["row_dims"], p["col_dims"], p["n_trials"], cfg.seed, workers=cfg.workers)
        c = spec.metadata["c"]
        cdf, bounds = (lambda x: marcenko_pastur_cdf(x, c)), marcenko_pastur_edges(c)
        dens = lambda x: marcenko_pastur_density(x, c)  # noqa: E731
        label, size = "squared singular value", f"{prod(p['row_dims'])}x{prod(p['col_dims'])}"
    ks = ks_distance(spec, cdf)
    edges, emp, lim = histogram_with_limit(spec, dens, bounds, p["bins"])
    write_table(out / "spectrum.csv", [label.replace(" ", "_")], [(float(v),) for v in spec.values])
    write_table(
        out / "histogram.csv", ["bin_left", "bin_right", "empirical_density", "limit_density"],
        [(float(a), float(b), float(e), float(l)) for a, b, e, l in zip(edges[:-1], edges[1:], emp, lim)],
    )
    plotting.histogram_figure(edges, emp, lim, out / "histogram.svg", stamp, xlabel=label,
                              title=f"{p['law']} law, matricized size {size}, {p['n_trials']} draws")
    return {"ks_distance": ks, "n_values": int(spec.values.size), "n_trials": p["n_trials"], "scale": spec.scale}


def _spiked_dims(p) -> tuple:
    if p["dims"]:
        return tuple(p["dims"])
    return tuple(max(1, int(round(c * p["total_dim"]))) for c in p["ratios"])


def _spiked(cfg: ExperimentConfig, out: Path, stamp: str) -> dict:
    p = cfg.params
    betas = grid_values(p["betas"])
    kw = dict(n_trials=p["n_trials"], restarts=p["restarts"], seed=cfg.seed, tol=p["tol"],
              max_iters=p["max_iters"], workers=cfg.workers)
    if p["family"] == "symmetric":
        res = alignment_sweep("symmetric", betas, order=p["order"], dim=p["dim"], **kw)
        title = f"symmetric order {p['order']}, I = {p['dim']}"
    else:
        dims = _spiked_dims(p)
        res = alignment_sweep("asymmetric", betas, dims=dims, **kw)
        title = f"asymmetric dims {list(dims)}"
    res.to_csv(out / "alignment.csv")
    plotting.alignment_figure(betas, res.mean_alignment, res.std_alignment, res.theory_alpha, res.feasible,
                              out / "alignment.svg", stamp, title=title)
    mean = res.mean_alignment.mean(axis=1)
    strong = res.feasible & (betas >= 2)
    summary = {
        "transition_beta": transition_beta(betas, mean) if len(betas) >= 4 else float("nan"),
        "converged_fraction": float(res.converged.mean()),
        "max_theory_residual": float(np.nanmax(res.theory_residual)) if res.feasible.any() else float("nan"),
    }
    if strong.any():
        summary["max_gap_beta_ge_2"] = float(np.max(np.abs(res.mean_alignment[strong] - res.theory_alpha[strong])))
    return summary


DRIVERS = {
    "sample": _sample,
    "moments": _moments,
    "lemma1": _lemma1,
    "kronecker": _kronecker,
    "process": _process,
    "spectrum": _spectrum,
    "spiked": _spiked,
}


def execute(cfg: ExperimentConfig, out_dir) -> RunManifest:
    """Run ``cfg`` into ``out_dir`` and write ``manifest.json`` there.

    On an error the manifest is still written, with ``status`` set
    to the error type, and the error is re-raised.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stamp = cfg.checksum()
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    t0 = time.perf_counter()
    status, summary = "ok", {}
    try:
        summary = DRIVERS[cfg.kind](cfg, out, stamp)
        _summary_csv(out / "summary.csv", summary)
    except Exception as e:
        status = type(e).__name__
        raise
    finally:
        emitted = sorted(f for f in out.iterdir() if f.is_file() and f.name != "manifest.json" and not f.name.startswith("."))
        files = [FileRecord.of(f, out) for f in emitted] if status == "ok" else []
        manifest = RunManifest(
            config=cfg.snapshot(), config_sha256=stamp, seed=cfg.seed, version=__version__,
            started_utc=started, wall_clock_s=round(time.perf_counter() - t0, 3), status=status,
            files=files, summary={k: (v if np.isfinite(v) else None) for k, v in summary.items()},
        )
        manifest.write(out / "manifest.json")
    return manifest
