"""Synthetic Hammerstein benchmark data.

Systems have nu poles and nu zeros with magnitudes uniform in [0.4, 0.93]
and phases uniform in [0, pi], paired with their conjugates (one real root
with random sign when nu is odd).  The LTI block is strictly causal: g_1 is
the direct-feedthrough coefficient of the monic rational transfer function,
so y_t depends on w_{t-1}, w_{t-2}, ...
"""

from dataclasses import dataclass

import numpy as np

from .nonlinearity import BasisSet, apply_nonlinearity
from .structured import SignalRecord, ToeplitzSpec, toeplitz_matvec

MAG_LOW, MAG_HIGH = 0.4, 0.93
INPUT_RANGE = 2.0


@dataclass(frozen=True)
class SystemSpec:
    nu: int
    poles: np.ndarray
    zeros: np.ndarray
    g: np.ndarray  # unit norm, g[0] > 0


@dataclass(frozen=True)
class ExperimentConfig:
    nu: int
    snr: float
    N: int = 500
    n: int = 100
    p: int = 7
    runs: int = 100
    seed: int = 0


# Default experiment grid: SNR 10 then SNR 1, orders 4, 8, 10, 20.
BENCHMARK_GRID = tuple((nu, snr) for snr in (10.0, 1.0) for nu in (4, 8, 10, 20))


@dataclass(frozen=True)
class GroundTruth:
    g: np.ndarray
    c: np.ndarray
    sigma2: float
    z: np.ndarray  # noiseless output
    w: np.ndarray  # intermediate signal
    system: SystemSpec


def _random_roots(count, rng):
    roots = []
    for _ in range(count // 2):
        r = rng.uniform(MAG_LOW, MAG_HIGH)
        phi = rng.uniform(0.0, np.pi)
        z = r * np.exp(1j * phi)
        roots.extend([z, np.conj(z)])
    if count % 2:
        sign = 1.0 if rng.random() < 0.5 else -1.0
        roots.append(complex(sign * rng.uniform(MAG_LOW, MAG_HIGH)))
    return np.array(roots, dtype=complex)


def _monic_poly(roots):
    """Coefficients of prod(1 - r q) in ascending powers of q (real part)."""
    coef = np.array([1.0 + 0j])
    for r in roots:
        coef = np.convolve(coef, [1.0, -r])
    return coef.real


def impulse_response(zeros, poles, n: int) -> np.ndarray:
    """First n Markov parameters of prod(1 - z_i q) / prod(1 - p_i q) by long division."""
    b = _monic_poly(zeros)
    a = _monic_poly(poles)
    h = np.zeros(n)
    for k in range(n):
        acc = b[k] if k < b.size else 0.0
        for j in range(1, min(k, a.size - 1) + 1):
            acc -= a[j] * h[k - j]
        h[k] = acc
    return h


def random_system(nu: int, n: int, rng: np.random.Generator) -> SystemSpec:
    if nu < 1 or n < nu:
        raise ValueError(f"need 1 <= nu <= n, got nu={nu}, n={n}")
    poles = _random_roots(nu, rng)
    zeros = _random_roots(nu, rng)
    h = impulse_response(zeros, poles, n)
    # h[0] = 1 for a monic numerator, so the first element is already positive
    g = h / np.linalg.norm(h)
    return SystemSpec(nu=nu, poles=poles, zeros=zeros, g=g)


def polynomial_from_roots(roots, sign: float = 1.0) -> np.ndarray:
    """Ascending monomial coefficients of sign * prod(x - r)."""
    coef = np.array([1.0])  # descending during the product
    for r in roots:
        coef = np.convolve(coef, [1.0, -float(r)])
    return sign * coef[::-1]


def random_polynomial(rng: np.random.Generator, degree: int = 6) -> np.ndarray:
    """Degree-``degree`` polynomial with roots uniform in [-2, 2] and random sign."""
    roots = rng.uniform(-INPUT_RANGE, INPUT_RANGE, size=degree)
    sign = 1.0 if rng.random() < 0.5 else -1.0
    return polynomial_from_roots(roots, sign)


def simulate(system: SystemSpec, c, basis: BasisSet, N: int, snr: float,
             rng: np.random.Generator):
    """Draw a dataset; returns (SignalRecord, GroundTruth).

    Noise variance is the empirical variance of the noiseless output
    divided by ``snr``.
    """
    c = np.asarray(c, dtype=float)
    n = system.g.size
    u = rng.uniform(-INPUT_RANGE, INPUT_RANGE, size=N)
    w = apply_nonlinearity(basis, c, u)
    z = toeplitz_matvec(ToeplitzSpec(w, n), system.g)
    sigma2 = float(np.var(z)) / snr
    y = z + np.sqrt(sigma2) * rng.standard_normal(N)
    truth = GroundTruth(g=system.g, c=c, sigma2=sigma2, z=z, w=w, system=system)
    return SignalRecord(u, y), truth


def generate_run(cfg: ExperimentConfig, seed: int, basis: BasisSet):
    """One Monte Carlo realization: system, nonlinearity and data from one seed."""
    rng = np.random.default_rng(seed)
    system = random_system(cfg.nu, cfg.n, rng)
    c = random_polynomial(rng, degree=cfg.p - 1)
    return simulate(system, c, basis, cfg.N, cfg.snr, rng)
