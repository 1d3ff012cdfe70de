"""Lower-triangular banded Toeplitz (truncated convolution) operators.

Indexing: every array is stored 0-based.  The input ``u`` holds
u_0 .. u_{N-1}; the output ``y`` holds y_1 .. y_N at positions 0 .. N-1, and
an impulse response ``g`` holds g_1 .. g_n at positions 0 .. n-1.  With that
convention the N x n operator built from a length-N ``source`` has entry
``[t, k] = source[t - k]`` for ``t >= k`` and zero otherwise, so that
``y = T(w) @ g`` is the strictly causal convolution
y_t = sum_{k=1}^{n} g_k w_{t-k}.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DatasetError


@dataclass(frozen=True)
class SignalRecord:
    """Paired input/output sequences of equal length N."""

    u: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if u.size == 0:
            raise DatasetError("signal record must contain at least one sample")
        if u.shape != y.shape:
            raise DimensionError(f"u has {u.size} samples but y has {y.size}")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(y))):
            raise DatasetError("signal record contains non-finite samples")
        u.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "y", y)

    @property
    def N(self) -> int:
        return self.u.size


@dataclass(frozen=True)
class ToeplitzSpec:
    """The N x n operator T_n(source), kept in factored form."""

    source: np.ndarray
    n: int

    def __post_init__(self):
        source = np.asarray(self.source, dtype=float).ravel()
        n = int(self.n)
        if n < 1 or n > source.size:
            raise DimensionError(
                f"band width n={n} must satisfy 1 <= n <= N={source.size}")
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "n", n)

    @property
    def N(self) -> int:
        return self.source.size

    @property
    def shape(self):
        return (self.N, self.n)


def toeplitz_matvec(spec: ToeplitzSpec, v) -> np.ndarray:
    """Return T_n(source) @ v, the truncated causal convolution."""
    v = np.asarray(v, dtype=float).ravel()
    if v.size != spec.n:
        raise DimensionError(f"vector has length {v.size}, operator has {spec.n} columns")
    return np.convolve(spec.source, v)[: spec.N]


def toeplitz_matvec_adjoint(spec: ToeplitzSpec, r) -> np.ndarray:
    """Return T_n(source).T @ r."""
    r = np.asarray(r, dtype=float).ravel()
    if r.size != spec.N:
        raise DimensionError(f"vector has length {r.size}, operator has {spec.N} rows")
    # (T^T r)_k = sum_s source[s] r[s + k], a correlation read off a reversed convolution
    full = np.convolve(r[::-1], spec.source)[: spec.N]
    return full[::-1][: spec.n].copy()


def toeplitz_cross_gram(sources, n: int) -> np.ndarray:
    """Cross-Gram tensor of several Toeplitz operators sharing a band width.

    Given ``sources`` of shape (p, N), returns ``G`` of shape (p, p, n, n)
    with ``G[a, b] = T_n(sources[a]).T @ T_n(sources[b])``.  Each lag is one
    running sum over the sample axis, so the cost is O(p^2 N n) and no
    N x n matrix is ever formed.
    """
    X = np.atleast_2d(np.asarray(sources, dtype=float))
    p, N = X.shape
    if n < 1 or n > N:
        raise DimensionError(f"band width n={n} must satisfy 1 <= n <= N={N}")
    G = np.empty((p, p, n, n))
    idx = np.arange(n)
    for d in range(n):
        # lagged[a, b, s] = X[a, s + d] * X[b, s], s = 0 .. N-1-d
        lagged = X[:, None, d:] * X[None, :, : N - d]
        csum = np.cumsum(lagged, axis=-1)
        rows = idx[: n - d]
        # entry (i, i+d) of T(x_a)^T T(x_b) sums x_a[s+d] x_b[s] up to s = N-1-i-d
        upper = csum[:, :, N - 1 - rows - d]
        G[:, :, rows, rows + d] = upper
        G[:, :, rows + d, rows] = np.swapaxes(upper, 0, 1)
    return G


def toeplitz_gram(spec: ToeplitzSpec) -> np.ndarray:
    """Return the n x n Gram matrix T_n(source).T @ T_n(source)."""
    G = toeplitz_cross_gram(spec.source[None, :], spec.n)[0, 0]
    return 0.5 * (G + G.T)


def commuted_toeplitz_apply(a, b) -> np.ndarray:
    """Return T_N(a zero-padded to N) @ b for a of length n <= N = len(b).

    Equals ``toeplitz_matvec(ToeplitzSpec(b, n), a)``: convolution commutes.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size > b.size:
        raise DimensionError(f"len(a)={a.size} exceeds len(b)={b.size}")
    padded = np.zeros(b.size)
    padded[: a.size] = a
    return np.convolve(padded, b)[: b.size]


def toeplitz_dense(spec: ToeplitzSpec) -> np.ndarray:
    """Materialize T_n(source) as a dense array (test oracles only)."""
    N, n = spec.shape
    T = np.zeros((N, n))
    for k in range(n):
        T[k:, k] = spec.source[: N - k]
    return T
