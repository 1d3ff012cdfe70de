"""Static nonlinearity as a linear combination of fixed basis functions."""

from abc import ABC, abstractmethod

import numpy as np

from .errors import DimensionError, NumericalError


class BasisSet(ABC):
    """A finite family phi_1 .. phi_p of scalar functions.

    Implementations must be stateless; :meth:`evaluate` is vectorized over
    ``x`` and takes the 1-based basis index.
    """

    p: int

    @abstractmethod
    def evaluate(self, i: int, x):
        ...

    def columns(self, x) -> np.ndarray:
        """Return the (len(x), p) matrix [phi_1(x), ..., phi_p(x)]."""
        x = np.asarray(x, dtype=float).ravel()
        return np.column_stack([self.evaluate(i, x) for i in range(1, self.p + 1)])


class PolynomialBasis(BasisSet):
    """Monomials phi_i(x) = x ** (i - 1), i = 1 .. p."""

    def __init__(self, p: int):
        if p < 1:
            raise ValueError(f"basis dimension must be positive, got {p}")
        self.p = int(p)

    def evaluate(self, i, x):
        if not 1 <= i <= self.p:
            raise IndexError(f"basis index {i} outside 1..{self.p}")
        x = np.asarray(x, dtype=float)
        out = np.ones_like(x)
        for _ in range(i - 1):
            out = out * x
        return out

    def columns(self, x):
        # cumulative products avoid the power operator on every column
        x = np.asarray(x, dtype=float).ravel()
        F = np.empty((x.size, self.p))
        F[:, 0] = 1.0
        for i in range(1, self.p):
            F[:, i] = F[:, i - 1] * x
        return F

    def __repr__(self):
        return f"PolynomialBasis(p={self.p})"

    def __eq__(self, other):
        return isinstance(other, PolynomialBasis) and other.p == self.p

    def __hash__(self):
        return hash(("poly", self.p))


def polynomial_basis(p: int) -> PolynomialBasis:
    return PolynomialBasis(p)


def build_regressor(basis: BasisSet, u) -> np.ndarray:
    """Regression matrix F(u): row t holds phi_1(u_t) .. phi_p(u_t)."""
    u = np.asarray(u, dtype=float).ravel()
    if u.size < 1:
        raise DimensionError("input sequence is empty")
    F = basis.columns(u)
    bad = np.argwhere(~np.isfinite(F))
    if bad.size:
        t, i = bad[0]
        raise NumericalError("basis evaluation is not finite", t=int(t), i=int(i) + 1)
    return F


def apply_nonlinearity(basis: BasisSet, c, u) -> np.ndarray:
    """Evaluate f(u) = F(u) @ c."""
    c = np.asarray(c, dtype=float).ravel()
    if c.size != basis.p:
        raise DimensionError(f"{c.size} coefficients for a basis of dimension {basis.p}")
    u = np.asarray(u, dtype=float).ravel()
    if isinstance(basis, PolynomialBasis):
        # Horner's scheme
        out = np.full_like(u, c[-1])
        for coef in c[-2::-1]:
            out = out * u + coef
        return out
    return build_regressor(basis, u) @ c
