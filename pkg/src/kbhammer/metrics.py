"""Fit scores and the scale/sign normalization used before scoring.

A Hammerstein pair (g, f) is only identifiable up to (alpha g, f / alpha).
Estimates are brought to unit-norm g with the sign of the reference's first
significant entry before any score is computed.  The reference is ground
truth, so this is used by the benchmark harness only.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .nonlinearity import BasisSet, apply_nonlinearity

SIGN_THRESHOLD = 1e-9


@dataclass(frozen=True)
class FitReport:
    fit_g: float
    fit_f: float
    seed: Optional[int] = None
    nu: Optional[int] = None
    snr: Optional[float] = None
    iterations: Optional[int] = None
    seconds: Optional[float] = None


def align_scale(g_hat, c_hat, g_ref):
    """Return (alpha * g_hat, c_hat / alpha) with ||alpha * g_hat|| = 1.

    The sign of alpha makes the first entry of the aligned g whose magnitude
    exceeds 1e-9 agree in sign with the same entry of ``g_ref``.
    """
    g_hat = np.asarray(g_hat, dtype=float)
    c_hat = np.asarray(c_hat, dtype=float)
    g_ref = np.asarray(g_ref, dtype=float)
    norm = np.linalg.norm(g_hat)
    if norm == 0 or not np.isfinite(norm):
        raise ValueError("cannot normalize a zero (or non-finite) impulse response")
    unit = g_hat / norm
    significant = np.flatnonzero(np.abs(unit) > SIGN_THRESHOLD)
    idx = significant[0]
    target = np.sign(g_ref[idx]) if g_ref[idx] != 0 else np.sign(unit @ g_ref)
    sign = 1.0 if target == 0 else float(target * np.sign(unit[idx]))
    alpha = sign / norm
    return alpha * g_hat, c_hat / alpha


def normalize(g_hat, c_hat):
    """Representative of (g_hat, c_hat) with ||g|| = 1 and a positive first significant entry."""
    g_hat = np.asarray(g_hat, dtype=float)
    lead = np.flatnonzero(np.abs(g_hat) > SIGN_THRESHOLD * np.linalg.norm(g_hat))
    ref = np.zeros_like(g_hat)
    if lead.size:
        ref[lead[0]] = 1.0
    return align_scale(g_hat, c_hat, ref)


def _fit(truth, estimate):
    truth = np.asarray(truth, dtype=float)
    estimate = np.asarray(estimate, dtype=float)
    if truth.shape != estimate.shape:
        raise ValueError(f"shape mismatch: {truth.shape} vs {estimate.shape}")
    spread = np.linalg.norm(truth - truth.mean())
    if spread == 0:
        raise ValueError("reference is constant; fit score undefined")
    return float(1.0 - np.linalg.norm(truth - estimate) / spread)


def fit_g(g_true, g_hat) -> float:
    """1 - ||g - g_hat|| / ||g - mean(g)||; apply :func:`align_scale` first."""
    return _fit(g_true, g_hat)


def fit_f(c_true, c_hat, basis: BasisSet, u) -> float:
    """Fit of the nonlinearity evaluated on the input samples ``u``."""
    return _fit(apply_nonlinearity(basis, c_true, u), apply_nonlinearity(basis, c_hat, u))


def score(g_true, c_true, g_hat, c_hat, basis: BasisSet, u, **meta) -> FitReport:
    """Align then compute both fits."""
    g_al, c_al = align_scale(g_hat, c_hat, g_true)
    return FitReport(fit_g=fit_g(g_true, g_al), fit_f=fit_f(c_true, c_al, basis, u), **meta)
