"""Empirical Bayes estimation of [c, sigma2, beta] by expectation-maximization.

Each iteration computes the posterior moments (m, P) of the impulse
response at the current hyperparameters, then maximizes the expected
complete-data log-likelihood

    Q = -N/2 log s2 - (||y - W m||^2 + Tr(W^T W P)) / (2 s2)
        - 1/2 log det K_beta - 1/2 Tr(K_beta^{-1} (P + m m^T))

which separates into a (c, s2) block and a beta block.  The c block is a
quadratic with closed-form maximizer, s2 follows in closed form once c is
updated, and beta is found by grid search.

Sign convention for beta: the beta block of Q is *minus one half* of
``log det K + Tr(K^{-1} M)``, so the update picks the grid point that
minimizes that expression.  Maximizing it instead breaks the monotone
decrease of the marginal negative log-likelihood.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg, optimize

from .errors import DimensionError, NumericalError
from .kernel import build_kernel, kernel_inv_quadform, kernel_logdet, tc_beta_objective
from .nonlinearity import BasisSet
from .posterior import (HyperParameters, PosteriorMoments, RegressorStats, _estep,
                        regressor_stats)
from .structured import SignalRecord, ToeplitzSpec, toeplitz_gram, toeplitz_matvec

log = logging.getLogger(__name__)

SIGMA2_FLOOR = 1e-12
CONVERGED = "converged"
MAX_ITERATIONS = "max-iterations"


def default_beta_grid() -> np.ndarray:
    return np.linspace(0.01, 0.99, 99)


@dataclass
class EmConfig:
    """EM controls.

    ``theta0`` selects user-supplied initialization; when it is None the
    start is random (seeded by ``rng_seed``).  The stopping rule compares
    the Euclidean norm of the raw theta step with ``tol``; note that theta
    mixes coefficient, variance and decay units.
    """

    tol: float = 1e-3
    max_iter: int = 200
    beta_grid: np.ndarray = field(default_factory=default_beta_grid)
    rng_seed: int = 0
    refine_beta: bool = True
    theta0: Optional[HyperParameters] = None

    def __post_init__(self):
        grid = np.asarray(self.beta_grid, dtype=float).ravel()
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 0:
            raise ValueError(f"max_iter must be non-negative, got {self.max_iter}")
        if grid.size == 0 or np.any(grid <= 0) or np.any(grid >= 1):
            raise ValueError("beta grid must be non-empty with all points in (0, 1)")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("beta grid must be strictly increasing")
        self.beta_grid = grid

    @property
    def init_strategy(self) -> str:
        return "random-default" if self.theta0 is None else "user-supplied"


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    theta: HyperParameters
    nll: float  # marginal negative log-likelihood at theta
    q: Optional[float]  # Q(theta, previous theta); None for the starting point
    sigma2_clamped: bool = False


@dataclass
class EmTrace:
    records: list = field(default_factory=list)
    termination_reason: str = MAX_ITERATIONS

    @property
    def nll(self) -> np.ndarray:
        return np.array([r.nll for r in self.records])

    @property
    def iterations(self) -> int:
        return len(self.records) - 1


@dataclass
class HammersteinEstimate:
    g_hat: np.ndarray
    c_hat: np.ndarray
    theta_hat: HyperParameters
    trace: EmTrace

    @property
    def iterations(self) -> int:
        return self.trace.iterations


# -- M-step -----------------------------------------------------------------

def _coefficients_from_stats(stats: RegressorStats, post: PosteriorMoments) -> np.ndarray:
    M = post.second_moment
    # A_ab = Tr(Z_a^T Z_b M), b_a = y^T Z_a m
    A = stats.trace_products(M)
    b = stats.corr @ post.mean
    eig = np.linalg.eigvalsh(A)
    if eig[-1] <= 0 or eig[0] <= 1e-13 * eig[-1]:
        raise NumericalError(
            "coefficient system is singular: the lagged basis regressors are rank "
            "deficient (e.g. constant input) or the posterior second moment vanishes",
            min_eig=float(eig[0]), max_eig=float(eig[-1]))
    return linalg.solve(A, b, assume_a="pos", check_finite=False)


def mstep_coefficients(data: SignalRecord, basis: BasisSet, post: PosteriorMoments,
                       n: int) -> np.ndarray:
    """Maximizer of the quadratic -1/2 c^T A c + b^T c over the coefficients."""
    return _coefficients_from_stats(regressor_stats(data, basis, n), post)


def _noise_variance(resid, trace_term, N):
    value = (resid @ resid + trace_term) / N
    if value <= SIGMA2_FLOOR:
        log.warning("noise variance update %.3g clamped to %.1g", value, SIGMA2_FLOOR)
        return SIGMA2_FLOOR, True
    return float(value), False


def mstep_noise_variance(data: SignalRecord, w_new, post: PosteriorMoments, n: int) -> float:
    """Closed-form noise variance given the updated intermediate signal.

    Results at or below 1e-12 are clamped to that floor (and logged).
    """
    spec = ToeplitzSpec(w_new, n)
    if spec.N != data.N:
        raise DimensionError(f"signal has {spec.N} samples, data has {data.N}")
    resid = data.y - toeplitz_matvec(spec, post.mean)
    trace_term = float(np.sum(toeplitz_gram(spec) * post.cov))
    return _noise_variance(resid, trace_term, data.N)[0]


def _noise_variance_from_stats(stats: RegressorStats, c_new, post: PosteriorMoments):
    resid = stats.y - stats.predict(c_new, post.mean)
    trace_term = float(np.sum(stats.w_gram(c_new) * post.cov))
    return _noise_variance(resid, trace_term, stats.N)


def beta_objective(post: PosteriorMoments, beta: float) -> float:
    """log det K_beta + Tr(K_beta^{-1} (P + m m^T)) via a Cholesky factor of K_beta.

    The beta update minimizes this.  :func:`mstep_beta` evaluates the same
    quantity in closed form; this generic route is kept as a cross-check.
    """
    kern = build_kernel(beta, post.mean.size)
    return kernel_logdet(kern) + kernel_inv_quadform(kern, post.second_moment)


def mstep_beta(post: PosteriorMoments, grid, previous: Optional[float] = None,
               refine: bool = False) -> float:
    """Grid search for the kernel shaping parameter.

    ``previous`` is added to the grid so that the beta block of Q can never
    decrease; ties go to the smaller beta.  With ``refine`` the winner is
    polished by a bounded scalar search between its grid neighbours and
    replaced only if that strictly lowers the objective.
    """
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise ValueError("beta grid is empty")
    if previous is not None:
        grid = np.union1d(grid, [previous])
    M = post.second_moment
    values = tc_beta_objective(M, grid)
    values = np.where(np.isfinite(values), values, np.inf)
    if not np.any(np.isfinite(values)):
        raise NumericalError("beta objective failed at every grid point", grid_size=grid.size)
    best = int(np.argmin(values))
    beta, value = float(grid[best]), float(values[best])
    if refine:
        lo = grid[best - 1] if best > 0 else 0.5 * grid[0]
        hi = grid[best + 1] if best + 1 < grid.size else 0.5 * (1.0 + grid[-1])
        res = optimize.minimize_scalar(lambda b: float(tc_beta_objective(M, b)),
                                       bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-8})
        if np.isfinite(res.fun) and res.fun < value:
            beta = float(res.x)
    return beta


def expected_complete_loglik(stats: RegressorStats, theta: HyperParameters,
                             post: PosteriorMoments) -> float:
    """Q(theta; m, P) without additive constants."""
    s2 = theta.sigma2
    resid = stats.y - stats.predict(theta.c, post.mean)
    fit = resid @ resid + np.sum(stats.w_gram(theta.c) * post.cov)
    prior = float(tc_beta_objective(post.second_moment, theta.beta))
    return float(-0.5 * stats.N * np.log(s2) - 0.5 * fit / s2 - 0.5 * prior)


# -- driver ------------------------------------------------------------------

def initial_theta(stats: RegressorStats, rng: np.random.Generator) -> HyperParameters:
    """Random start scaled so that ||F(u) c0|| = ||y||, s2 = var(y), beta = 0.5."""
    y_norm = np.linalg.norm(stats.y)
    if y_norm == 0:
        raise NumericalError("output is identically zero; nothing to identify")
    c0 = rng.standard_normal(stats.p)
    w_norm = np.linalg.norm(stats.signal(c0))
    if w_norm == 0:
        raise NumericalError("basis regressors vanish on the input")
    sigma2 = max(float(np.var(stats.y)), SIGMA2_FLOOR)
    return HyperParameters(c=c0 * (y_norm / w_norm), sigma2=sigma2, beta=0.5)


def em_fit(data: SignalRecord, basis: BasisSet, n: int,
           config: Optional[EmConfig] = None) -> HammersteinEstimate:
    """Identify (g, f) by EM on the marginal likelihood."""
    config = config or EmConfig()
    if n > data.N:
        raise DimensionError(f"impulse-response length n={n} exceeds N={data.N}")
    stats = regressor_stats(data, basis, n)
    if config.theta0 is not None:
        theta = config.theta0
        if theta.c.size != basis.p:
            raise DimensionError(f"theta0 has {theta.c.size} coefficients, basis has {basis.p}")
    else:
        theta = initial_theta(stats, np.random.default_rng(config.rng_seed))

    try:
        post, nll = _estep(stats, theta)
    except NumericalError as exc:
        raise exc.annotate(iteration=0) from None
    trace = EmTrace(records=[IterationRecord(0, theta, nll, None)])

    for k in range(1, config.max_iter + 1):
        try:
            c = _coefficients_from_stats(stats, post)
            s2, clamped = _noise_variance_from_stats(stats, c, post)
            beta = mstep_beta(post, config.beta_grid, previous=theta.beta,
                              refine=config.refine_beta)
            new = HyperParameters(c=c, sigma2=s2, beta=beta)
            q = expected_complete_loglik(stats, new, post)
            post, nll = _estep(stats, new)
        except NumericalError as exc:
            raise exc.annotate(iteration=k) from None
        step = np.linalg.norm(new.as_vector() - theta.as_vector())
        theta = new
        trace.records.append(IterationRecord(k, theta, nll, q, clamped))
        log.debug("iter %d nll=%.6f step=%.3g beta=%.2f s2=%.3g", k, nll, step, beta, s2)
        if step < config.tol:
            trace.termination_reason = CONVERGED
            break

    return HammersteinEstimate(g_hat=post.mean, c_hat=theta.c.copy(), theta_hat=theta,
                               trace=trace)
