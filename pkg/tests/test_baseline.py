import numpy as np
import pytest

from kbhammer.baseline import baseline_fit, rank_one_factors
from kbhammer.datagen import random_system, simulate
from kbhammer.errors import NumericalError
from kbhammer.metrics import score
from kbhammer.nonlinearity import polynomial_basis
from kbhammer.structured import SignalRecord


def test_noiseless_recovery():
    rng = np.random.default_rng(1)
    basis = polynomial_basis(3)
    s = random_system(2, 10, rng)
    data, truth = simulate(s, [0.5, -1.0, 0.8], basis, 400, 1e12, rng)
    est = baseline_fit(data, basis, 10)
    rep = score(truth.g, truth.c, est.g_hat, est.c_hat, basis, data.u)
    assert rep.fit_g > 0.999 and rep.fit_f > 0.999
    assert est.residual_norm < 1e-3 * np.linalg.norm(data.y)


def test_rank_one_matrix_is_fixed_point(rng):
    g = rng.standard_normal(6)
    g /= np.linalg.norm(g)
    g *= np.sign(g[0])
    c = rng.standard_normal(3)
    gh, ch = rank_one_factors(np.outer(g, c))
    assert np.allclose(gh, g) and np.allclose(ch, c)


def test_eckart_young(rng):
    Theta = rng.standard_normal((8, 4))
    g, c = rank_one_factors(Theta)
    s = np.linalg.svd(Theta, compute_uv=False)
    assert np.linalg.norm(Theta - np.outer(g, c)) == pytest.approx(np.sqrt(np.sum(s[1:] ** 2)))
    assert np.linalg.norm(g) == pytest.approx(1.0) and g[np.argmax(np.abs(g) > 1e-9)] > 0


def test_pure_noise_leaves_residual(rng):
    data = SignalRecord(rng.uniform(-2, 2, 300), rng.standard_normal(300))
    est = baseline_fit(data, polynomial_basis(2), 5)
    assert est.Theta.shape == (5, 2)
    assert est.residual_norm > 0.9 * np.linalg.norm(data.y)


def test_deterministic(rng):
    data = SignalRecord(rng.uniform(-2, 2, 100), rng.standard_normal(100))
    a = baseline_fit(data, polynomial_basis(3), 8)
    b = baseline_fit(data, polynomial_basis(3), 8)
    assert np.array_equal(a.Theta, b.Theta) and np.array_equal(a.g_hat, b.g_hat)


def test_degenerate_data(rng):
    with pytest.raises(NumericalError):
        baseline_fit(SignalRecord(rng.uniform(-2, 2, 20), np.zeros(20)), polynomial_basis(2), 3)
