"""First-order stable-spline (TC) kernel with entries beta ** max(i, j).

The kernel scale is fixed to one: the Hammerstein gain ambiguity is
absorbed by the nonlinearity coefficients, so no amplitude
hyperparameter appears here.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DimensionError, NumericalError, ParameterDomainError

_JITTER = 1e-10


@dataclass(frozen=True)
class StableSplineKernel:
    beta: float
    n: int
    matrix: np.ndarray
    chol: np.ndarray  # lower-triangular, matrix = chol @ chol.T (up to jitter)
    jitter: float = 0.0

    def matvec(self, v) -> np.ndarray:
        return self.matrix @ np.asarray(v, dtype=float)


def kernel_matrix(beta: float, n: int) -> np.ndarray:
    """Dense n x n TC kernel, 1-based exponent max(i, j)."""
    k = np.arange(1, n + 1)
    return beta ** np.maximum.outer(k, k).astype(float)


def build_kernel(beta: float, n: int) -> StableSplineKernel:
    """Build and factor the TC kernel for ``0 < beta < 1``.

    If the Cholesky factorization fails (beta close to one at large n) the
    diagonal is loaded once with ``1e-10 * max(diag)``; a second failure
    raises :class:`NumericalError`.
    """
    beta = float(beta)
    n = int(n)
    if not 0.0 < beta < 1.0:
        raise ParameterDomainError(f"kernel shaping parameter must lie in (0, 1), got {beta}")
    if n < 1:
        raise ParameterDomainError(f"kernel order must be positive, got {n}")
    K = kernel_matrix(beta, n)
    jitter = 0.0
    try:
        L = np.linalg.cholesky(K)
    except np.linalg.LinAlgError:
        jitter = _JITTER * K.diagonal().max()
        try:
            L = np.linalg.cholesky(K + jitter * np.eye(n))
        except np.linalg.LinAlgError:
            raise NumericalError("stable-spline kernel is not positive definite",
                                 beta=beta, n=n) from None
    if not np.all(L.diagonal() > 0.0):
        raise NumericalError("stable-spline kernel factor has a zero pivot", beta=beta, n=n)
    K.setflags(write=False)
    L.setflags(write=False)
    return StableSplineKernel(beta=beta, n=n, matrix=K, chol=L, jitter=jitter)


def kernel_logdet(k: StableSplineKernel) -> float:
    return float(2.0 * np.sum(np.log(k.chol.diagonal())))


def _check_square(k, M):
    M = np.asarray(M, dtype=float)
    if M.shape != (k.n, k.n):
        raise DimensionError(f"expected a {k.n}x{k.n} matrix, got shape {M.shape}")
    return M


def kernel_inv_quadform(k: StableSplineKernel, M) -> float:
    """Tr(K^{-1} M) through two triangular solves."""
    M = _check_square(k, M)
    X = linalg.solve_triangular(k.chol, M, lower=True, check_finite=False)
    Y = linalg.solve_triangular(k.chol, X.T, lower=True, check_finite=False)
    return float(np.trace(Y))


def kernel_solve(k: StableSplineKernel, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[0] != k.n:
        raise DimensionError(f"right-hand side has length {v.shape[0]}, kernel order is {k.n}")
    return linalg.cho_solve((k.chol, True), v, check_finite=False)


def kernel_whiten(k: StableSplineKernel, v) -> np.ndarray:
    """Return L^{-1} v; ``||L^{-1} v||^2 = v^T K^{-1} v``."""
    return linalg.solve_triangular(k.chol, np.asarray(v, dtype=float), lower=True,
                                   check_finite=False)


def tc_log_increments(beta, n: int) -> np.ndarray:
    """log of the diagonal D in K_beta = U D U^T (U upper-triangular ones).

    d_k = beta^k (1 - beta) for k < n and d_n = beta^n.  ``beta`` may be an
    array; the result then has shape (len(beta), n).
    """
    beta = np.asarray(beta, dtype=float)[..., None]
    k = np.arange(1, n + 1)
    logd = k * np.log(beta) + np.log1p(-beta)
    logd[..., -1] = n * np.log(beta[..., 0])
    return logd


def tc_beta_objective(M, betas) -> np.ndarray:
    """log det K_beta + Tr(K_beta^{-1} M) for every entry of ``betas``.

    Uses K^{-1} = U^{-T} D^{-1} U^{-1}, where U^{-1} is the first-difference
    operator, so the beta-independent diagonal of U^{-1} M U^{-T} is formed
    once and each beta costs O(n).
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    diag = M.diagonal()
    e = diag.copy()
    e[:-1] = diag[:-1] - 2.0 * M.diagonal(1) + diag[1:]
    e = np.maximum(e, 0.0)  # diagonal of a PSD congruence; clip rounding
    logd = tc_log_increments(betas, n)
    with np.errstate(over="ignore"):
        quad = np.sum(e * np.exp(-logd), axis=-1)
    return np.sum(logd, axis=-1) + quad
