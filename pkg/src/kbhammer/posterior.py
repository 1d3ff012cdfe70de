"""Posterior moments of the impulse response and the marginal likelihood.

Everything is evaluated in the n-dimensional impulse-response space.  With
K = L L^T and G = W^T W the posterior covariance is written as

    P = (G / s2 + K^{-1})^{-1} = L (I + L^T G L / s2)^{-1} L^T,

which needs one Cholesky factorization of a matrix bounded below by the
identity, so no inverse of the (badly conditioned) kernel is ever formed.
The same factor yields log det Sigma_y through the determinant lemma.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DimensionError, NumericalError, ParameterDomainError
from .kernel import build_kernel, kernel_whiten
from .nonlinearity import BasisSet, build_regressor
from .structured import SignalRecord, ToeplitzSpec, toeplitz_cross_gram, toeplitz_matvec_adjoint


@dataclass(frozen=True)
class HyperParameters:
    """theta = [c, sigma2, beta]."""

    c: np.ndarray
    sigma2: float
    beta: float

    def __post_init__(self):
        c = np.array(self.c, dtype=float).ravel()
        if not np.all(np.isfinite(c)):
            raise ParameterDomainError("nonlinearity coefficients must be finite")
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ParameterDomainError(f"noise variance must be positive, got {self.sigma2}")
        if not 0.0 < self.beta < 1.0:
            raise ParameterDomainError(f"beta must lie in (0, 1), got {self.beta}")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "sigma2", float(self.sigma2))
        object.__setattr__(self, "beta", float(self.beta))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.c, [self.sigma2, self.beta]])


@dataclass(frozen=True)
class PosteriorMoments:
    mean: np.ndarray
    cov: np.ndarray

    @property
    def second_moment(self) -> np.ndarray:
        """E[g g^T] = P + m m^T."""
        return self.cov + np.outer(self.mean, self.mean)


@dataclass(frozen=True)
class RegressorStats:
    """Data summaries that do not depend on theta.

    For Z_a = T_n(F(u) e_a), ``gram[a, b] = Z_a^T Z_b`` and
    ``corr[a] = Z_a^T y``.  Since W = sum_a c_a Z_a, both W^T W and W^T y
    are cheap contractions of these with c.
    """

    columns: np.ndarray  # (p, N), row a is phi_a(u)
    y: np.ndarray
    gram: np.ndarray  # (p, p, n, n)
    corr: np.ndarray  # (p, n)
    n: int

    @property
    def N(self) -> int:
        return self.y.size

    @property
    def p(self) -> int:
        return self.columns.shape[0]

    def signal(self, c) -> np.ndarray:
        return np.asarray(c) @ self.columns

    def w_gram(self, c) -> np.ndarray:
        p, n = self.p, self.n
        c = np.asarray(c, dtype=float)
        G = (np.outer(c, c).ravel() @ self.gram.reshape(p * p, n * n)).reshape(n, n)
        return 0.5 * (G + G.T)

    def trace_products(self, M) -> np.ndarray:
        """The p x p matrix of Tr(Z_a^T Z_b M)."""
        p, n = self.p, self.n
        A = (self.gram.reshape(p * p, n * n) @ np.asarray(M).T.ravel()).reshape(p, p)
        return 0.5 * (A + A.T)

    def w_corr(self, c) -> np.ndarray:
        return np.asarray(c) @ self.corr

    def predict(self, c, g) -> np.ndarray:
        """W(c) @ g."""
        return np.convolve(self.signal(c), g)[: self.N]


def regressor_stats(data: SignalRecord, basis: BasisSet, n: int) -> RegressorStats:
    n = int(n)
    if n < 1 or n > data.N:
        raise DimensionError(f"impulse-response length n={n} must satisfy 1 <= n <= N={data.N}")
    X = build_regressor(basis, data.u).T.copy()
    gram = toeplitz_cross_gram(X, n)
    corr = np.stack([toeplitz_matvec_adjoint(ToeplitzSpec(x, n), data.y) for x in X])
    return RegressorStats(columns=X, y=data.y, gram=gram, corr=corr, n=n)


def _estep(stats: RegressorStats, theta: HyperParameters):
    """Return (PosteriorMoments, marginal negative log-likelihood)."""
    if theta.c.size != stats.p:
        raise DimensionError(f"theta has {theta.c.size} coefficients, basis has {stats.p}")
    n, s2 = stats.n, theta.sigma2
    kern = build_kernel(theta.beta, n)
    L = kern.chol
    G = stats.w_gram(theta.c)
    h = stats.w_corr(theta.c)
    B = np.eye(n) + (L.T @ G @ L) / s2
    try:
        R = np.linalg.cholesky(0.5 * (B + B.T))
    except np.linalg.LinAlgError:
        raise NumericalError("posterior precision factorization failed",
                             c=theta.c.tolist(), sigma2=s2, beta=theta.beta) from None
    V = linalg.solve_triangular(R, L.T, lower=True, check_finite=False)  # R^{-1} L^T
    P = V.T @ V
    P = 0.5 * (P + P.T)
    m = V.T @ (V @ h) / s2
    resid = stats.y - stats.predict(theta.c, m)
    whitened = kernel_whiten(kern, m)
    # y^T Sigma_y^{-1} y = (||y - W m||^2 + s2 m^T K^{-1} m) / s2, free of cancellation
    quad = (resid @ resid + s2 * (whitened @ whitened)) / s2
    logdet = stats.N * np.log(s2) + 2.0 * np.sum(np.log(R.diagonal()))
    return PosteriorMoments(mean=m, cov=P), float(logdet + quad)


def posterior_moments(data: SignalRecord, basis: BasisSet, theta: HyperParameters,
                      n: int) -> PosteriorMoments:
    """Posterior mean and covariance of g given y at fixed theta.

    The mean is the minimum mean squared error estimate of the impulse
    response.
    """
    return _estep(regressor_stats(data, basis, n), theta)[0]


def marginal_neg_loglik(data: SignalRecord, basis: BasisSet, theta: HyperParameters,
                        n: int) -> float:
    """log det Sigma_y + y^T Sigma_y^{-1} y with Sigma_y = W K W^T + s2 I.

    This is -2 log p(y; theta) without the N log(2 pi) constant.
    """
    return _estep(regressor_stats(data, basis, n), theta)[1]
