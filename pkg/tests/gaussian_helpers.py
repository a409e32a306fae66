"""Random valid moment pairs and a scipy reference density for Gaussian tests."""

import numpy as np
from scipy import stats

from randtensors.tensor_core import dematricize, einstein_product, hermitian_transpose, matricize, vec

from oracles import crandn

# positions listed for the 2x2x2 mode-1 structure, 1-based (i1, i2, i3, i1', i2', i3')
MODE1_SUPPORT = [
    (1, 1, 1, 1, 1, 1), (1, 1, 2, 1, 1, 2), (1, 2, 1, 1, 2, 1), (1, 2, 2, 1, 2, 2),
    (2, 2, 2, 2, 2, 2), (2, 1, 1, 2, 1, 1), (2, 2, 1, 2, 2, 1), (2, 1, 2, 2, 1, 2),
    (1, 1, 1, 2, 1, 1), (2, 1, 1, 1, 1, 1), (1, 2, 1, 2, 2, 1), (2, 2, 1, 1, 2, 1),
    (1, 1, 2, 2, 1, 2), (2, 1, 2, 1, 1, 2), (1, 2, 2, 2, 2, 2), (2, 2, 2, 1, 2, 2),
]


def random_psd(rng, dims):
    g = crandn(rng, dims + dims)
    return einstein_product(g, hermitian_transpose(g, len(dims)), len(dims)) / np.prod(dims)


def random_improper(rng, dims):
    """(Q, Q~) of x = A z + B conj(z) with circular unit-variance z, so the pair is valid."""
    k = int(np.prod(dims))
    a, b = crandn(rng, (k, k)) / np.sqrt(2 * k), crandn(rng, (k, k)) / (3 * np.sqrt(2 * k))
    a += np.eye(k)
    q = a @ a.conj().T + b @ b.conj().T
    qt = a @ b.T + b @ a.T
    return dematricize(q, dims + dims, len(dims)), dematricize(qt, dims + dims, len(dims))


def composite_oracle(mean, q, qt, x):
    """scipy log-density of [Re vec x; Im vec x]; the complex density carries no Jacobian factor."""
    n = mean.ndim
    qm, pm = matricize(q, n), matricize(qt, n)
    cov = 0.5 * np.block(
        [[np.real(qm + pm), np.imag(pm - qm)], [np.imag(qm + pm), np.real(qm - pm)]]
    )
    z = np.concatenate([vec(x).real, vec(x).imag])
    mu = np.concatenate([vec(mean).real, vec(mean).imag])
    return stats.multivariate_normal(mu, cov).logpdf(z)
