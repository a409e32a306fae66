import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy import stats

from randtensors.errors import ArgumentError, NotPSDError, ShapeError, SingularCovarianceError
from randtensors.random_gaussian import (
    GaussianSpec,
    SeparableCorrelation,
    augment,
    build_mode_restricted_correlation,
    characteristic_function,
    composite,
    correlation_sqrt,
    empirical_cf,
    estimate_correlation,
    estimate_moments,
    kronecker_counterexample_check,
    log_pdf,
    log_pdf_vectorized,
    parameter_counts,
    propriety_statistic,
    sample_correlated,
    sample_iid,
    sample_separable,
    separable_channel_correlation,
    separable_to_full,
    split_augmented,
    unit_correlation_matrix,
    verify_lemma1,
)
from randtensors.tensor_core import (
    dematricize,
    einstein_product,
    frobenius_norm,
    hermitian_transpose,
    identity_tensor,
    is_hermitian,
    is_pseudo_diagonal,
    matricize,
    vec,
    vec_batch,
)

from gaussian_helpers import MODE1_SUPPORT, composite_oracle, random_improper, random_psd
from oracles import crandn


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# sampling -----------------------------------------------------------------

def test_iid_moments_and_determinism():
    x = sample_iid((1,), "circular", seed=0, size=10**6)[:, 0]
    assert abs(x.mean()) <= 5e-3
    assert abs(np.mean(x * x)) <= 5e-3
    assert abs(np.mean(np.abs(x) ** 2) - 1) <= 5e-3
    assert abs(np.var(x.real) - 0.5) <= 5e-3
    r = sample_iid((1,), "real", seed=0, size=10**6)
    assert abs(r.mean()) <= 5e-3 and abs(r.var() - 1) <= 5e-3
    assert_array_equal(sample_iid((2, 3), seed=42), sample_iid((2, 3), seed=42))
    with pytest.raises(ArgumentError):
        sample_iid((2,), "bogus")


def test_sqrt_identity_and_diagonal():
    assert_allclose(correlation_sqrt(identity_tensor([2, 3])), identity_tensor([2, 3]), atol=1e-14)
    d = dematricize(np.diag([4.0, 9.0, 16.0, 25.0]), (2, 2, 2, 2), 2)
    c = correlation_sqrt(d)
    assert is_pseudo_diagonal(c, 2, tol=1e-12)
    assert_allclose(np.diag(matricize(c, 2)).real, [2, 3, 4, 5])


def test_sqrt_reconstruction(rng):
    r = random_psd(rng, (2, 3))
    c = correlation_sqrt(r)
    rec = einstein_product(c, hermitian_transpose(c, 2), 2)
    assert frobenius_norm(rec - r) / frobenius_norm(r) <= 1e-10


def test_sqrt_clamps_and_rejects():
    tiny = dematricize(np.diag([1.0, -1e-12]), (2, 2), 1)
    assert np.all(np.isfinite(correlation_sqrt(tiny)))
    bad = dematricize(np.diag([1.0, -0.5]), (2, 2), 1)
    with pytest.raises(NotPSDError) as err:
        correlation_sqrt(bad)
    assert err.value.min_eigenvalue == pytest.approx(-0.5)


def test_sample_correlated_identity_is_iid():
    x = sample_correlated(identity_tensor([2, 2]), seed=3, size=50_000)
    r = estimate_correlation(x)
    assert frobenius_norm(r - identity_tensor([2, 2])) <= 0.03


def test_sample_correlated_single_matches_batch_formula(rng):
    r = random_psd(rng, (2, 2))
    one = sample_correlated(r, seed=9)
    b = sample_iid((2, 2), seed=9)
    assert_allclose(one, einstein_product(correlation_sqrt(r), b, 2))


def test_sample_correlated_converges(rng):
    r = random_psd(rng, (2, 2))
    errs = []
    for n in (10**3, 10**4, 10**5):
        x = sample_correlated(r, seed=n, size=n)
        errs.append(frobenius_norm(estimate_correlation(x) - r) / frobenius_norm(r))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] <= 0.05


def test_mode1_support_matches_listing():
    factor = np.array([[1.0, 0.6 + 0.2j], [0.6 - 0.2j, 1.0]])
    r = build_mode_restricted_correlation((2, 2, 2), [0], [factor])
    expected = {tuple(i - 1 for i in p) for p in MODE1_SUPPORT}
    support = {idx for idx in itertools.product(range(2), repeat=6) if r[idx] != 0}
    assert support == expected


def test_mode1_sampled_support():
    factor = np.array([[1.0, 0.6], [0.6, 1.0]])
    r = build_mode_restricted_correlation((2, 2, 2), [0], [factor])
    n = 100_000
    rhat = estimate_correlation(sample_correlated(r, seed=5, size=n))
    on = np.zeros(r.shape, bool)
    for p in MODE1_SUPPORT:
        on[tuple(i - 1 for i in p)] = True
    assert np.max(np.abs(rhat[~on])) <= 3 / np.sqrt(n)
    assert np.min(np.abs(rhat[on])) >= 0.5


def test_mode_restricted_pair_support_exhaustive():
    f1 = unit_correlation_matrix(0.4)
    f2 = unit_correlation_matrix(0.3j)
    r = build_mode_restricted_correlation((2, 2, 2), [0, 1], [f1, f2])
    for idx in itertools.product(range(2), repeat=6):
        assert (r[idx] != 0) == (idx[2] == idx[5])


def test_mode_restricted_empty_and_joint():
    assert_array_equal(build_mode_restricted_correlation((2, 3), [], []), identity_tensor([2, 3]))
    f1, f2 = unit_correlation_matrix(0.4), unit_correlation_matrix(0.2, 3)
    sep = build_mode_restricted_correlation((2, 3, 2), [0, 1], [f1, f2])
    joint = build_mode_restricted_correlation((2, 3, 2), [0, 1], np.kron(f2, f1))
    assert_allclose(joint, sep)
    assert is_hermitian(joint)


def test_mode_restricted_errors():
    with pytest.raises(ArgumentError):
        build_mode_restricted_correlation((2, 2), [0], [np.array([[1.0, 0.5], [0.1, 1.0]])])
    with pytest.raises(ShapeError):
        build_mode_restricted_correlation((2, 2), [0], [np.eye(3)])
    with pytest.raises(ArgumentError):
        build_mode_restricted_correlation((2, 2), [0, 0], [np.eye(2), np.eye(2)])


def test_separable_full_entries(rng):
    f = [unit_correlation_matrix(0.5), unit_correlation_matrix(0.2 + 0.3j, 3), np.diag([2.0, 1.0])]
    s = SeparableCorrelation(f)
    full = separable_to_full(s)
    for idx in itertools.product(*(range(d) for d in s.shape * 2)):
        i, ip = idx[:3], idx[3:]
        assert full[idx] == pytest.approx(f[0][i[0], ip[0]] * f[1][i[1], ip[1]] * f[2][i[2], ip[2]])
    # vec covariance is the reversed Kronecker product of the factors
    assert_allclose(matricize(full, 3), np.kron(f[2], np.kron(f[1], f[0])), atol=1e-14)


def test_separable_identity_factors_iid():
    s = SeparableCorrelation([np.eye(2), np.eye(3)])
    x = sample_separable(s, seed=1, size=20_000)
    assert x.shape == (20_000, 2, 3)
    assert frobenius_norm(estimate_correlation(x) - identity_tensor([2, 3])) <= 0.05


def test_separable_vec_covariance_mc():
    p1, p2 = unit_correlation_matrix(0.6), unit_correlation_matrix(-0.4 + 0.3j)
    x = sample_separable(SeparableCorrelation([p1, p2]), seed=2, size=100_000)
    v = vec_batch(x)
    cov = v.T @ v.conj() / v.shape[0]
    assert np.linalg.norm(cov - np.kron(p2, p1)) / np.linalg.norm(np.kron(p2, p1)) <= 0.05


def test_separable_rejects_bad_factor():
    with pytest.raises(ArgumentError):
        SeparableCorrelation([np.array([[1.0, 2.0], [2.0, 1.0]])])


def test_parameter_counts():
    full, sep = parameter_counts(4, 3)
    assert (full, sep) == (2080, 30)
    assert sep / full == pytest.approx(30 / 2080)


# moments ------------------------------------------------------------------

def test_moments_constant_samples():
    x = np.ones((10, 2, 2)) * (1 + 2j)
    m = estimate_moments(x)
    assert_allclose(m.mean, x[0])
    assert np.all(m.cov == 0) and np.all(m.pseudo_cov == 0)


def test_moments_circular_proper_rate():
    stats_ = []
    for n in (1_000, 100_000):
        m = estimate_moments(sample_iid((2, 2), seed=n, size=n))
        stats_.append(propriety_statistic(m.cov, m.pseudo_cov))
    assert stats_[1] < stats_[0]
    assert stats_[1] <= 5 / np.sqrt(100_000)


def test_moments_improper_closed_form():
    a = 0.8
    z = sample_iid((2, 3), seed=4, size=200_000)
    m = estimate_moments(z + a * np.conj(z))
    eye = identity_tensor([2, 3])
    assert frobenius_norm(m.cov - (1 + a * a) * eye) <= 0.03
    assert frobenius_norm(m.pseudo_cov - 2 * a * eye) <= 0.03
    assert propriety_statistic(m.cov, m.pseudo_cov) == pytest.approx(2 * a / (1 + a * a), abs=0.01)


def test_propriety_real_data_and_zero():
    m = estimate_moments(sample_iid((3,), "real", seed=1, size=1000).astype(complex))
    assert propriety_statistic(m.cov, m.pseudo_cov) == pytest.approx(1.0)
    with pytest.raises(ArgumentError):
        propriety_statistic(np.zeros((2, 2)), np.zeros((2, 2)))


def test_moment_invariants_and_blocks(rng):
    x = crandn(rng, (500, 2, 3)) + 0.3 * np.conj(crandn(rng, (500, 2, 3)))
    m = estimate_moments(list(x), chunk=64)
    swap = (2, 3, 0, 1)
    assert_array_equal(m.cov, np.conj(np.transpose(m.cov, swap)))
    assert_array_equal(m.pseudo_cov, np.transpose(m.pseudo_cov, swap))
    assert np.linalg.eigvalsh(matricize(m.cov, 2)).min() >= -1e-10
    q, qt, qtc, qc = split_augmented(m.augmented)
    assert_array_equal(q, m.cov)
    assert_array_equal(qt, m.pseudo_cov)
    assert_array_equal(qtc, np.conj(m.pseudo_cov))
    assert_array_equal(qc, np.conj(m.cov))
    # augmented covariance equals the sample covariance of the augmented tensors
    d = augment(x - x.mean(axis=0))
    direct = np.einsum("sabc,sdef->abcdef", d, np.conj(d)) / x.shape[0]
    assert_allclose(m.augmented, direct, atol=1e-12)


def test_moments_errors():
    with pytest.raises(ShapeError):
        estimate_moments([np.zeros(2), np.zeros(3)])
    with pytest.raises(ArgumentError):
        estimate_moments(np.zeros((1, 2)))


def test_augment_and_composite():
    x = np.array([1 + 2j, 3 - 1j])
    assert_array_equal(augment(x), [[1 + 2j, 1 - 2j], [3 - 1j, 3 + 1j]])
    assert_array_equal(composite(x), [[1, 2], [3, -1]])


# densities ----------------------------------------------------------------

def test_standard_real_at_zero():
    spec = GaussianSpec.standard_real((2, 3))
    assert log_pdf(spec, np.zeros((2, 3))) == pytest.approx(-3 * np.log(2 * np.pi))


@pytest.mark.parametrize("dims", [(2,), (2, 2), (3, 1, 2)])
def test_proper_tensor_equals_vector(rng, dims):
    spec = GaussianSpec.proper(crandn(rng, dims), random_psd(rng, dims) + identity_tensor(dims))
    for _ in range(3):
        x = crandn(rng, dims)
        assert abs(log_pdf(spec, x) - log_pdf_vectorized(spec, x)) <= 1e-9
        assert log_pdf(spec, x) == pytest.approx(composite_oracle(spec.mean, spec.cov, spec.pseudo_cov, x), abs=1e-9)


@pytest.mark.parametrize("dims", [(1,), (2,), (2, 2), (2, 1, 2)])
def test_improper_matches_composite_oracle(rng, dims):
    q, qt = random_improper(rng, dims)
    spec = GaussianSpec(crandn(rng, dims), q, qt)
    for _ in range(3):
        x = crandn(rng, dims)
        want = composite_oracle(spec.mean, q, qt, x)
        assert log_pdf(spec, x) == pytest.approx(want, abs=1e-9)
        assert log_pdf_vectorized(spec, x) == pytest.approx(want, abs=1e-9)


def test_real_flavor_matches_scipy(rng):
    a = rng.standard_normal((4, 4))
    cov = dematricize(a @ a.T + np.eye(4), (2, 2, 2, 2), 2)
    spec = GaussianSpec(rng.standard_normal((2, 2)), cov, None, "real")
    x = rng.standard_normal((2, 2))
    want = stats.multivariate_normal(vec(spec.mean), matricize(cov, 2)).logpdf(vec(x))
    assert log_pdf(spec, x) == pytest.approx(want, abs=1e-10)
    assert log_pdf_vectorized(spec, x) == pytest.approx(want, abs=1e-10)


def test_batched_log_pdf(rng):
    q, qt = random_improper(rng, (2,))
    spec = GaussianSpec(np.zeros(2), q, qt)
    xs = crandn(rng, (5, 2))
    assert_allclose(log_pdf(spec, xs), [log_pdf(spec, x) for x in xs])


def test_singular_covariance_carries_condition():
    cov = dematricize(np.diag([1.0, 0.0]), (2, 2), 1)
    spec = GaussianSpec(np.zeros(2, complex), cov, None, "circular")
    with pytest.raises(SingularCovarianceError) as err:
        log_pdf(spec, np.zeros(2))
    assert err.value.condition is not None and err.value.condition > 1e12


def test_spec_validation():
    eye = identity_tensor([2])
    with pytest.raises(ArgumentError):
        GaussianSpec(np.ones(2), eye, None, "circular")
    with pytest.raises(ArgumentError):
        GaussianSpec(np.zeros(2), eye, 0.1 * eye, "proper")
    with pytest.raises(ShapeError):
        GaussianSpec(np.zeros(3), eye, None)


def _grid_mass(spec, lim, pts):
    axis = np.linspace(-lim, lim, pts)
    h = axis[1] - axis[0]
    k = spec.size
    grids = np.meshgrid(*([axis] * (2 * k)), indexing="ij")
    x = np.stack([g.ravel() for g in grids[:k]], -1) + 1j * np.stack([g.ravel() for g in grids[k:]], -1)
    x = x.reshape((-1,) + spec.shape)
    return np.sum(np.exp(log_pdf(spec, x))) * h ** (2 * k)


def test_density_integrates_to_one(rng):
    scalar = GaussianSpec(np.array([0.2j]), np.array([[1.0]]), np.array([[0.5 + 0.2j]]))
    assert abs(_grid_mass(scalar, 9.0, 301) - 1) <= 1e-6
    q = random_psd(rng, (2,)) + identity_tensor([2])
    assert abs(_grid_mass(GaussianSpec.proper(np.zeros(2), q), 8.0, 41) - 1) <= 1e-3
    q, qt = random_improper(rng, (2,))
    assert abs(_grid_mass(GaussianSpec(np.zeros(2), 0.5 * q, 0.5 * qt), 7.0, 41) - 1) <= 1e-3
    # real flavor, direct 1-D and 2-D sums
    for k in (1, 2):
        spec = GaussianSpec.standard_real((k,))
        axis = np.linspace(-10, 10, 801)
        grids = np.meshgrid(*([axis] * k), indexing="ij")
        x = np.stack([g.ravel() for g in grids], -1)
        assert abs(np.sum(np.exp(log_pdf(spec, x))) * (axis[1] - axis[0]) ** k - 1) <= 1e-6


def test_cf_closed_forms():
    spec = GaussianSpec.proper(np.zeros(1), np.ones((1, 1)))
    assert characteristic_function(spec, np.zeros(1)) == 1
    for w in (0.3, 1.0, 2.5):
        assert characteristic_function(spec, np.array([w])) == pytest.approx(np.exp(-w * w / 4))


def test_cf_matches_monte_carlo(rng):
    r = random_psd(rng, (2, 2))
    spec = GaussianSpec.proper(np.zeros((2, 2)), r)
    n = 100_000
    x = sample_correlated(r, seed=11, size=n)
    for _ in range(10):
        w = crandn(rng, (2, 2))
        assert abs(empirical_cf(x, w) - characteristic_function(spec, w)) <= 3 / np.sqrt(n)


def test_cf_improper_monte_carlo():
    a = 0.6
    z = sample_iid((2,), seed=2, size=100_000)
    x = z + a * np.conj(z) + np.array([0.5, -1j])
    eye = identity_tensor([2])
    spec = GaussianSpec(np.array([0.5, -1j]), (1 + a * a) * eye, 2 * a * eye)
    for w in (np.array([1.0, 0.5j]), np.array([0.3 - 0.7j, 1.2])):
        assert abs(empirical_cf(x, w) - characteristic_function(spec, w)) <= 0.02


# channel checks ------------------------------------------------------------

def test_lemma1_identity():
    rep = verify_lemma1(identity_tensor([2]), identity_tensor([2]), 20_000, seed=0)
    assert rep.uniformity_deviation <= 0.05


def test_lemma1_separable_channel():
    g_r = separable_to_full(SeparableCorrelation([unit_correlation_matrix(0.5)] * 2))
    g_t = separable_to_full(SeparableCorrelation([unit_correlation_matrix(0.3)] * 2))
    rep = verify_lemma1(g_r, g_t, 100_000, seed=1)
    assert rep.uniformity_deviation <= 0.05
    assert rep.pseudo_diagonal_deviation <= 0.03
    assert rep.transmit_estimates.shape == (4, 2, 2, 2, 2)
    # the correlation tensor itself is separable: entries are products
    r = separable_channel_correlation(g_r, g_t)
    assert r[1, 0, 0, 1, 0, 1, 1, 1] == pytest.approx(g_r[1, 0, 0, 1] * g_t[0, 1, 1, 1])


def test_lemma1_rejects_bad_inputs():
    with pytest.raises(ArgumentError):
        verify_lemma1(2 * identity_tensor([2]), identity_tensor([2]), 100)
    not_psd = np.array([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(NotPSDError):
        verify_lemma1(not_psd, identity_tensor([2]), 100)


def test_kronecker_special_case_is_separable():
    rho, mu = 0.3, 0.4
    rep = kronecker_counterexample_check(rho, mu, rho * mu, rho * mu)
    assert rep.separable and rep.uniform and rep.is_psd
    assert_allclose(rep.r_mimo, rep.r_kron, atol=1e-15)
    # complex parameters: the (2,3) entry of R_T kron R_R is mu conj(rho)
    rho, mu = 0.3 + 0.1j, 0.2 - 0.2j
    rep = kronecker_counterexample_check(rho, mu, rho * mu, mu * np.conj(rho))
    assert rep.separable
    assert not kronecker_counterexample_check(rho, mu, rho * mu, rho * np.conj(mu)).separable


def test_kronecker_counterexample():
    rep = kronecker_counterexample_check(0.3, 0.3, 0.2, 0.1, n_samples=50_000, seed=3)
    assert rep.uniform and rep.is_psd and not rep.separable
    assert rep.kron_gap >= 0.1
    assert rep.r_mimo[0, 3] == 0.2 and rep.r_kron[0, 3] == pytest.approx(0.09)
    assert (1, 4) in {(a, b) for a, b, _, _ in rep.differing_entries}
    assert rep.empirical_deviation <= 0.05


def test_kronecker_trivial_and_precondition():
    rep = kronecker_counterexample_check(0, 0, 0, 0)
    assert_array_equal(rep.r_mimo, np.eye(4))
    assert rep.separable
    with pytest.raises(ArgumentError):
        kronecker_counterexample_check(0.5, 0.3, 0.3, 0.0)
