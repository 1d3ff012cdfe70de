"""Over-parameterized least-squares comparator.

The product g c^T is estimated as an unconstrained n x p matrix Theta by
ridge-regularized least squares on the lagged basis regressors
phi_a(u_{t-k}), then split into (g, c) by its leading singular triple.
This is a stand-in comparator, *not* a prediction-error method with a known
model order.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import NumericalError
from .metrics import normalize
from .nonlinearity import BasisSet
from .posterior import regressor_stats
from .structured import SignalRecord

RIDGE = 1e-6


@dataclass(frozen=True)
class BilinearEstimate:
    Theta: np.ndarray  # (n, p)
    g_hat: np.ndarray
    c_hat: np.ndarray
    residual_norm: float


def rank_one_factors(Theta):
    """Best rank-one approximation s u v^T of Theta as (g, c) = (u, s v).

    g has unit norm and a positive first significant entry.
    """
    U, s, Vt = np.linalg.svd(np.asarray(Theta, dtype=float), full_matrices=False)
    return normalize(U[:, 0], s[0] * Vt[0])


def baseline_fit(data: SignalRecord, basis: BasisSet, n: int, ridge: float = RIDGE) -> BilinearEstimate:
    stats = regressor_stats(data, basis, n)
    p = stats.p
    # normal equations of y ~ sum_a Z_a Theta[:, a]; block (a, b) is Z_a^T Z_b
    H = stats.gram.transpose(0, 2, 1, 3).reshape(p * n, p * n)
    rhs = stats.corr.ravel()
    scale = float(np.mean(H.diagonal()))
    if scale == 0 or not np.any(rhs):
        raise NumericalError("degenerate data: zero regressors or zero output-regressor correlation")
    H = 0.5 * (H + H.T) + ridge * scale * np.eye(p * n)
    try:
        theta = linalg.cho_solve(linalg.cho_factor(H, lower=True), rhs, check_finite=False)
    except linalg.LinAlgError:
        raise NumericalError("ridge normal equations are not positive definite", ridge=ridge) from None
    Theta = theta.reshape(p, n).T
    g, c = rank_one_factors(Theta)
    resid = stats.y - stats.predict(c, g)
    return BilinearEstimate(Theta=Theta, g_hat=g, c_hat=c, residual_norm=float(np.linalg.norm(resid)))
