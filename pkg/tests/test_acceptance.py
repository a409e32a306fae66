"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or
``python tests/test_acceptance.py``. The lines are printed even when
output capture is on.
"""

import itertools
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate

from randtensors import cli
from randtensors.random_gaussian import (
    GaussianSpec,
    SeparableCorrelation,
    build_mode_restricted_correlation,
    estimate_correlation,
    kronecker_counterexample_check,
    log_pdf,
    log_pdf_vectorized,
    sample_correlated,
    separable_to_full,
    unit_correlation_matrix,
    verify_lemma1,
)
from randtensors.processes import InputSpec, MLTIFilter, default_grid, verify_spectral_relations, verify_wss_filter_relations
from randtensors.spectral import (
    empirical_spectrum_hermitian,
    empirical_spectrum_rectangular,
    ks_distance,
    marcenko_pastur_atom,
    marcenko_pastur_cdf,
    marcenko_pastur_density,
    marcenko_pastur_edges,
    semicircle_cdf,
    semicircle_density,
)
from randtensors.spiked import (
    AsymmetricSpikedModel,
    SymmetricSpikedModel,
    alignment_sweep,
    asymmetric_alignment_prediction,
    asymmetric_edge,
    asymmetric_g_solver,
    best_of_restarts,
    loss_symmetric,
    power_iteration_asymmetric,
    power_iteration_symmetric,
    random_unit_vector,
    sample_symmetric_noise,
    symmetric_alignment_prediction,
    transition_beta,
)
from randtensors.tensor_core import contracted_product, einstein_product, matricize, mode_n_product, outer_product

from gaussian_helpers import MODE1_SUPPORT, random_improper, random_psd
from oracles import crandn, loop_contracted, loop_einstein, loop_mode_n, loop_outer


@pytest.fixture
def report(capsys):
    """Print one PASS/FAIL line for a criterion, then assert it."""

    def emit(name, checks, seconds):
        ok = all(bool(v) for _, v in checks)
        detail = "; ".join(f"{label}: {'ok' if v else 'FAILED'}" for label, v in checks)
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name} ({seconds:.1f} s) {detail}")
        assert ok, f"{name}: {detail}"

    return emit


def rel_err(got, ref):
    scale = np.linalg.norm(ref)
    return np.linalg.norm(got - ref) / (scale if scale else 1.0)


def random_dims(rng, max_order, max_dim):
    return tuple(int(d) for d in rng.integers(1, max_dim + 1, rng.integers(1, max_order + 1)))


# ---------------------------------------------------------------------------


def test_algebra_oracles(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(100)
    worst, n_shapes = 0.0, 0
    while n_shapes < 200:
        left, shared, right = (random_dims(rng, 2, 4) for _ in range(3))
        a, b = crandn(rng, left + shared), crandn(rng, shared + right)
        if a.size * b.size // max(1, int(np.prod(shared))) > 4096:
            continue
        n_shapes += 1
        worst = max(worst, rel_err(einstein_product(a, b, len(shared)), loop_einstein(a, b, len(shared))))
        # contract a random subset of matching modes, in shuffled order
        pa = rng.permutation(a.ndim)
        modes_a = [int(m) for m in pa[: rng.integers(1, a.ndim + 1)]]
        c = crandn(rng, tuple(a.shape[m] for m in modes_a) + random_dims(rng, 1, 3))
        modes_c = list(range(len(modes_a)))
        worst = max(worst, rel_err(contracted_product(a, c, modes_a, modes_c), loop_contracted(a, c, modes_a, modes_c)))
        n = int(rng.integers(a.ndim))
        u = crandn(rng, (int(rng.integers(1, 5)), a.shape[n]))
        worst = max(worst, rel_err(mode_n_product(a, u, n), loop_mode_n(a, u, n)))
        if a.size * b.size <= 4096:
            worst = max(worst, rel_err(outer_product(a, b), loop_outer(a, b)))
    hom = 0.0
    for _ in range(100):
        i, j, k = (random_dims(rng, 3, 3) for _ in range(3))
        x, y = crandn(rng, i + j), crandn(rng, j + k)
        lhs = matricize(einstein_product(x, y, len(j)), len(i))
        hom = max(hom, rel_err(lhs, matricize(x, len(i)) @ matricize(y, len(j))))
    dt = time.perf_counter() - t0
    report(
        "algebra oracle suite",
        [(f"{n_shapes} shapes, max rel err {worst:.1e} <= 1e-12", worst <= 1e-12),
         (f"homomorphism on 100 pairs, max rel err {hom:.1e} <= 1e-12", hom <= 1e-12),
         (f"runtime {dt:.1f} s <= 60 s", dt <= 60)],
        dt,
    )


def test_gaussian_density_equivalence(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(200)
    worst, n = 0.0, 0
    while n < 50:
        dims = random_dims(rng, 3, 4)
        if np.prod(dims) > 16:
            continue
        mean = crandn(rng, dims)
        if n % 2:
            q, qt = random_improper(rng, dims)
            spec = GaussianSpec(mean, q, qt)
        else:
            spec = GaussianSpec.proper(mean, random_psd(rng, dims) + np.eye(int(np.prod(dims))).reshape(dims + dims))
        for _ in range(3):
            x = mean + crandn(rng, dims)
            worst = max(worst, abs(log_pdf(spec, x) - log_pdf_vectorized(spec, x)))
        n += 1
    report("Gaussian density equivalence",
           [(f"50 specs (25 proper, 25 improper), max |diff| {worst:.1e} <= 1e-9", worst <= 1e-9)],
           time.perf_counter() - t0)


def test_correlation_sampling(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(300)
    n = 100_000
    errors = []
    while len(errors) < 10:
        dims = random_dims(rng, 3, 4)
        if np.prod(dims) > 64:
            continue
        r = random_psd(rng, dims)
        x = sample_correlated(r, seed=len(errors), size=n)
        errors.append(rel_err(estimate_correlation(x), r))
    # mode-1 structure on 2x2x2: exact support and small off-support estimates
    factor = np.array([[1.0, 0.6], [0.6, 1.0]])
    r = build_mode_restricted_correlation((2, 2, 2), [0], [factor])
    expected = {tuple(i - 1 for i in p) for p in MODE1_SUPPORT}
    support = {idx for idx in itertools.product(range(2), repeat=6) if r[idx] != 0}
    rhat = estimate_correlation(sample_correlated(r, seed=5, size=n))
    off = np.ones(r.shape, bool)
    for idx in expected:
        off[idx] = False
    off_max = float(np.max(np.abs(rhat[off])))
    dt = time.perf_counter() - t0
    report(
        "correlation sampling",
        [(f"10 PSD tensors, max rel err {max(errors):.4f} <= 0.05", max(errors) <= 0.05),
         ("mode-1 support equals the 16 listed positions", support == expected),
         (f"off-support max {off_max:.4f} <= 3/sqrt(n) = {3 / np.sqrt(n):.4f}", off_max <= 3 / np.sqrt(n)),
         (f"runtime {dt:.1f} s <= 300 s", dt <= 300)],
        dt,
    )


def test_lemma1_and_kronecker(report):
    t0 = time.perf_counter()
    g_r = separable_to_full(SeparableCorrelation([unit_correlation_matrix(0.6)] * 2))
    g_t = separable_to_full(SeparableCorrelation([unit_correlation_matrix(0.4)] * 2))
    rep = verify_lemma1(g_r, g_t, 100_000, seed=1)
    kr = kronecker_counterexample_check(0.3, 0.3, 0.2, 0.1)
    r_mimo = np.array([[1, 0.3, 0.3, 0.2], [0.3, 1, 0.1, 0.3], [0.3, 0.1, 1, 0.3], [0.2, 0.3, 0.3, 1]])
    r_kron = np.kron([[1, 0.3], [0.3, 1]], [[1, 0.3], [0.3, 1]])
    gap = float(np.linalg.norm(r_mimo - r_kron))
    report(
        "separable channel uniformity and Kronecker counterexample",
        [(f"2x2 by 2x2 separable channel, uniformity deviation {rep.uniformity_deviation:.4f} <= 0.05",
          rep.uniformity_deviation <= 0.05),
         ("counterexample entries exact", np.array_equal(kr.r_mimo, r_mimo) and np.allclose(kr.r_kron, r_kron, atol=1e-15)),
         ("counterexample is PSD and uniform", kr.is_psd and kr.uniform),
         (f"||R_MIMO - R_T kron R_R||_F = {kr.kron_gap:.4f} >= 0.1", kr.kron_gap >= 0.1 and abs(kr.kron_gap - gap) <= 1e-15)],
        time.perf_counter() - t0,
    )


def test_wss_and_psd_relations(report):
    t0 = time.perf_counter()
    spec = InputSpec((2, 2))
    grid = default_grid(64)
    r_err, s_err = [], []
    for k in range(5):
        f = MLTIFilter.random((2, 2), 3, seed=1000 + k)
        wss = verify_wss_filter_relations(f, spec, 10_000, seed=2000 + k)
        sp = verify_spectral_relations(f, spec, grid, 10_000, seed=3000 + k)
        r_err.append(max(wss.r_y_error, wss.r_yx_error))
        s_err.append(max(sp.s_y_error, sp.s_yx_error))
    dt = time.perf_counter() - t0
    report(
        "WSS/PSD relations",
        [(f"5 filters, max R_Y/R_YX error {max(r_err):.4f} <= 0.05", max(r_err) <= 0.05),
         (f"64-point grid, max S_Y/S_YX error {max(s_err):.4f} <= 0.08", max(s_err) <= 0.08),
         (f"runtime {dt:.1f} s <= 300 s", dt <= 300)],
        dt,
    )


def test_semicircle_law(report):
    t0 = time.perf_counter()
    big = ks_distance(empirical_spectrum_hermitian((30, 30), 5, seed=41), semicircle_cdf)
    small = ks_distance(empirical_spectrum_hermitian((10, 10), 20, seed=42), semicircle_cdf)
    dt = time.perf_counter() - t0
    report(
        "semicircle law",
        [(f"900x900, 5 draws, KS {big:.4f} <= 0.03", big <= 0.03),
         (f"100x100, 20 draws, KS {small:.4f} <= 0.08", small <= 0.08),
         ("KS decreases with size", big < small),
         (f"runtime {dt:.1f} s <= 120 s", dt <= 120)],
        dt,
    )


def test_marcenko_pastur_law(report):
    t0 = time.perf_counter()
    big = empirical_spectrum_rectangular((10, 20), (20, 20), 5, seed=51)
    small = empirical_spectrum_rectangular((5, 10), (10, 10), 20, seed=52)
    ks_big = ks_distance(big, lambda x: marcenko_pastur_cdf(x, 0.5))
    ks_small = ks_distance(small, lambda x: marcenko_pastur_cdf(x, 0.5))
    report(
        "Marcenko-Pastur law",
        [(f"200x400 (c = {big.metadata['c']}), 5 draws, KS {ks_big:.4f} <= 0.04", ks_big <= 0.04 and big.metadata["c"] == 0.5),
         (f"50x100, 20 draws, KS {ks_small:.4f} <= 0.08", ks_small <= 0.08)],
        time.perf_counter() - t0,
    )


def test_spiked_symmetric(report):
    t0 = time.perf_counter()
    betas = np.linspace(0.5, 3.0, 26)
    res = alignment_sweep("symmetric", betas, n_trials=20, restarts=10, seed=6, order=3, dim=20)
    mean = res.mean_alignment[:, 0]
    b_t = transition_beta(betas, mean)
    strong = betas >= 2
    gap = float(np.max(np.abs(mean[strong] - res.theory_alpha[strong, 0])))
    # theory solutions on a fine grid, including every sweep point
    preds = [symmetric_alignment_prediction(3, b) for b in np.union1d(betas, np.linspace(1.16, 10, 200))]
    resid = max(p.residual for p in preds if p.feasible)
    dt = time.perf_counter() - t0
    report(
        "spiked symmetric model",
        [(f"transition at beta {b_t:.3f} in [1.0, 1.4]", 1.0 <= b_t <= 1.4),
         (f"max gap to theory for beta >= 2 is {gap:.4f} <= 0.1", gap <= 0.1),
         (f"max theory residual {resid:.1e} <= 1e-10", resid <= 1e-10),
         (f"runtime {dt:.1f} s <= 600 s", dt <= 600)],
        dt,
    )


def test_spiked_asymmetric(report):
    t0 = time.perf_counter()
    dims = (20, 20, 20)
    res = alignment_sweep("asymmetric", [4.0], n_trials=10, restarts=10, seed=9, dims=dims)
    pred = asymmetric_alignment_prediction(dims, 4.0)
    gap = float(np.max(np.abs(res.mean_alignment[0] - pred.alpha)))
    # g-solver residuals over random ratios and z across the existence set
    rng = np.random.default_rng(90)
    resid = 0.0
    for _ in range(100):
        raw = rng.uniform(0.05, 1.0, rng.integers(3, 6))
        c = raw / raw.sum()
        _, edge = asymmetric_edge(c)
        for z in edge + np.array([1e-8, 1e-3, 0.1, 1.0, 10.0, 1e3]):
            g = asymmetric_g_solver(z, c)
            resid = max(resid, float(np.max(np.abs(g**2 - (g.sum() + z) * g - c))) / max(1.0, z) ** 2)
    # equal ratios: every g solves 2 g^2 + 3 g + 1/3 = 0 at z = 3; take the root in (-1/3, 0)
    quad = np.roots([2.0, 3.0, 1.0 / 3.0])
    ref = float(quad[(quad > -1 / 3) & (quad < 0)][0])
    g3 = asymmetric_g_solver(3.0, np.full(3, 1 / 3))
    cross = float(np.max(np.abs(g3 - ref)))
    report(
        "spiked asymmetric model",
        [(f"dims (20,20,20), beta 4, max alignment gap {gap:.4f} <= 0.1", gap <= 0.1),
         (f"g-solver scaled residuals max {resid:.1e} <= 1e-12", resid <= 1e-12),
         (f"z = 3 quadratic root {ref:.6f}, solver gap {cross:.1e} <= 1e-9", cross <= 1e-9 and abs(ref + 0.1208) <= 1e-4)],
        time.perf_counter() - t0,
    )


def _grid_mass_complex_scalar(spec, half_width, n):
    axis = np.linspace(-half_width, half_width, n)
    re, im = np.meshgrid(axis, axis, indexing="ij")
    x = (spec.mean[0] + re + 1j * im).reshape(-1, 1)
    return float(np.sum(np.exp(log_pdf(spec, x))) * (axis[1] - axis[0]) ** 2)


def _grid_mass_real(spec, half_width, n):
    axis = np.linspace(-half_width, half_width, n)
    k = spec.mean.size
    grids = np.meshgrid(*([axis] * k), indexing="ij")
    x = np.stack([g.ravel() for g in grids], -1) + spec.mean
    return float(np.sum(np.exp(log_pdf(spec, x))) * (axis[1] - axis[0]) ** k)


def central_gradient(fun, params, h=1e-5):
    grad = np.empty_like(params)
    for i in range(params.size):
        e = np.zeros_like(params)
        e[i] = h
        grad[i] = (fun(params + e) - fun(params - e)) / (2 * h)
    return grad


def test_property_suite(report):
    t0 = time.perf_counter()
    tol = 1e-10
    # Z-eigenpair residuals
    residuals, n_pairs = [], 0
    grad_norms = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        beta = float(rng.uniform(0, 4))
        order, dim = (3, 10) if seed % 2 else (4, 6)
        a = SymmetricSpikedModel.random(order, dim, beta, seed=seed).generate(seed=seed + 100).tensor
        pairs = power_iteration_symmetric(a, random_unit_vector(dim, rng, 5), tol=tol, max_iters=5000)
        conv = [p for p in pairs if p.converged]
        residuals += [p.residual for p in conv]
        n_pairs += len(pairs)
        if conv:
            p = best_of_restarts(conv)
            grad = central_gradient(lambda v: loss_symmetric(a, v[0], v[1:]), np.concatenate([[p.lam], p.u]))
            grad_norms.append(float(np.linalg.norm(grad)))
        dims = (5, 6, 7)
        b = AsymmetricSpikedModel.random(dims, beta, seed=seed).generate(seed=seed + 200).tensor
        pairs = power_iteration_asymmetric(b, [random_unit_vector(d, rng, 3) for d in dims], tol=tol, max_iters=5000)
        residuals += [p.residual for p in pairs if p.converged]
        n_pairs += len(pairs)
    # symmetric noise variance profile at I = 30
    dim = 30
    draws = np.stack([sample_symmetric_noise(3, dim, seed=s) for s in range(100)])
    i, j, k = np.indices((dim,) * 3)
    profile = [float(np.var(draws[:, m])) for m in ((i == j) & (j == k), (i == j) & (j != k), (i < j) & (j < k))]
    profile_err = max(abs(v / t - 1) for v, t in zip(profile, (1.0, 1 / 3, 1 / 6)))
    # densities integrate to one
    masses = {"semicircle": integrate.quad(semicircle_density, -2, 2, args=(2.0,), epsabs=1e-13)[0]}
    for c in (0.25, 0.5, 2.0):
        lo, hi = marcenko_pastur_edges(c)
        masses[f"MP c={c}"] = integrate.quad(marcenko_pastur_density, lo, hi, args=(c,), epsabs=1e-13, limit=200)[0] + marcenko_pastur_atom(c)
    masses["MP c=1"] = integrate.quad(marcenko_pastur_density, 0, 4, args=(1.0,), epsabs=1e-13, limit=200)[0]
    masses["complex proper"] = _grid_mass_complex_scalar(GaussianSpec.proper(np.array([0.5 - 0.2j]), np.array([[1.5]])), 10.0, 301)
    masses["complex improper"] = _grid_mass_complex_scalar(
        GaussianSpec(np.array([0.2j]), np.array([[1.0]]), np.array([[0.5 + 0.2j]])), 9.0, 301)
    masses["real 2-D"] = _grid_mass_real(GaussianSpec(np.array([0.3, -1.0]), np.array([[1.0, 0.4], [0.4, 0.8]]), None, "real"), 10.0, 401)
    mass_err = max(abs(m - 1) for m in masses.values())
    report(
        "property suite",
        [(f"{len(residuals)}/{n_pairs} converged pairs, max residual {max(residuals):.1e} <= 10 tol", max(residuals) <= 10 * tol),
         (f"loss gradient at {len(grad_norms)} critical points, max {max(grad_norms):.1e} <= 1e-3", max(grad_norms) <= 1e-3),
         (f"noise variance profile {np.round(profile, 4).tolist()} within 10% (max rel dev {profile_err:.3f})", profile_err <= 0.1),
         (f"{len(masses)} densities, max |mass - 1| {mass_err:.1e} <= 1e-6", mass_err <= 1e-6)],
        time.perf_counter() - t0,
    )


def test_determinism(report, tmp_path):
    t0 = time.perf_counter()
    configs = sorted(Path(str(cli.canonical_config("fig6"))).parent.glob("*.yaml"))
    checks = []
    for path in configs:
        for out in ("first", "second"):
            assert cli.main(["run", str(path), "--out", str(tmp_path / out)]) == 0
        a, b = tmp_path / "first" / path.stem, tmp_path / "second" / path.stem
        names = sorted(f.name for f in a.iterdir() if f.name != "manifest.json")
        same = names == sorted(f.name for f in b.iterdir() if f.name != "manifest.json") and all(
            (a / n).read_bytes() == (b / n).read_bytes() for n in names)
        checks.append((f"{path.stem} ({len(names)} files)", same))
    report("determinism of canonical configs", checks, time.perf_counter() - t0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
