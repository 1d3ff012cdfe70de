import numpy as np
import pytest

from kbhammer.errors import DimensionError, ParameterDomainError
from kbhammer.nonlinearity import polynomial_basis
from kbhammer.posterior import (HyperParameters, _estep, marginal_neg_loglik, posterior_moments,
                                regressor_stats)
from kbhammer.structured import SignalRecord

from oracles import dense_kernel, dense_nll, dense_regressor, dense_toeplitz, joint_conditioning


def instance(seed, N=15, n=4, p=2):
    rng = np.random.default_rng(seed)
    data = SignalRecord(rng.uniform(-2, 2, N), rng.standard_normal(N))
    theta = HyperParameters(c=rng.standard_normal(p), sigma2=float(rng.uniform(0.2, 2.0)),
                            beta=float(rng.uniform(0.3, 0.9)))
    return data, polynomial_basis(p), theta


def dense_W(data, theta, n):
    return dense_toeplitz(dense_regressor(data.u, theta.c.size) @ theta.c, n)


def test_zero_regressor_returns_prior(rng):
    data = SignalRecord(rng.uniform(-2, 2, 10), rng.standard_normal(10))
    theta = HyperParameters(c=np.zeros(2), sigma2=0.5, beta=0.6)
    post = posterior_moments(data, polynomial_basis(2), theta, 3)
    assert np.allclose(post.mean, 0.0)
    assert np.allclose(post.cov, dense_kernel(0.6, 3), atol=1e-14)
    # NLL = N log s2 + y^T y / s2
    nll = marginal_neg_loglik(data, polynomial_basis(2), theta, 3)
    assert nll == pytest.approx(10 * np.log(0.5) + data.y @ data.y / 0.5, rel=1e-12)


def test_large_noise_returns_prior():
    data, basis, theta = instance(3)
    theta = HyperParameters(c=theta.c, sigma2=1e12, beta=theta.beta)
    post = posterior_moments(data, basis, theta, 4)
    assert np.allclose(post.cov, dense_kernel(theta.beta, 4), atol=1e-9)
    assert np.abs(post.mean).max() < 1e-9


@pytest.mark.parametrize("seed", range(8))
def test_moments_and_nll_match_dense(seed):
    data, basis, theta = instance(seed)
    post, nll = _estep(regressor_stats(data, basis, 4), theta)
    W, K = dense_W(data, theta, 4), dense_kernel(theta.beta, 4)
    m, P = joint_conditioning(W, K, theta.sigma2, data.y)
    assert np.allclose(post.mean, m, rtol=1e-9, atol=1e-12)
    assert np.allclose(post.cov, P, rtol=1e-9, atol=1e-12)
    assert nll == pytest.approx(dense_nll(W, K, theta.sigma2, data.y), rel=1e-10)
    # posterior covariance is symmetric and never exceeds the prior
    assert np.array_equal(post.cov, post.cov.T)
    assert np.linalg.eigvalsh(K - post.cov).min() > -1e-12
    assert np.allclose(post.second_moment, P + np.outer(m, m))


def test_doubling_output_scales_quadratic_term():
    data, basis, theta = instance(11)
    W, K = dense_W(data, theta, 4), dense_kernel(theta.beta, 4)
    logdet = np.linalg.slogdet(W @ K @ W.T + theta.sigma2 * np.eye(15))[1]
    nll1 = marginal_neg_loglik(data, basis, theta, 4)
    nll2 = marginal_neg_loglik(SignalRecord(data.u, 2 * data.y), basis, theta, 4)
    assert nll2 - logdet == pytest.approx(4 * (nll1 - logdet), rel=1e-10)


def test_regressor_stats_match_dense(rng):
    data = SignalRecord(rng.uniform(-2, 2, 12), rng.standard_normal(12))
    stats = regressor_stats(data, polynomial_basis(3), 4)
    F = dense_regressor(data.u, 3)
    c, g = rng.standard_normal(3), rng.standard_normal(4)
    W = dense_toeplitz(F @ c, 4)
    assert np.allclose(stats.w_gram(c), W.T @ W)
    assert np.allclose(stats.w_corr(c), W.T @ data.y)
    assert np.allclose(stats.predict(c, g), W @ g)


def test_hyperparameter_validation():
    with pytest.raises(ParameterDomainError):
        HyperParameters(c=[1.0], sigma2=0.0, beta=0.5)
    with pytest.raises(ParameterDomainError):
        HyperParameters(c=[1.0], sigma2=1.0, beta=1.0)
    theta = HyperParameters(c=[1.0, 2.0], sigma2=0.5, beta=0.3)
    assert np.array_equal(theta.as_vector(), [1.0, 2.0, 0.5, 0.3])
    data, basis, _ = instance(0)
    with pytest.raises(DimensionError):
        posterior_moments(data, polynomial_basis(3), theta, 4)
    with pytest.raises(DimensionError):
        regressor_stats(data, basis, 16)
