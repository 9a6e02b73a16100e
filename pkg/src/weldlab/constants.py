"""Normalization constants of the weight-n monomial bases.

The weight-n monomials ``c[n]_k z^(k-n)`` are orthonormal for the hyperbolic
inner products used throughout the package.  For a weight ``m <= 0`` the
constant is obtained from the dual weight ``n' = 1 - m``.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import factorial, pi, sqrt

import numpy as np


def alpha(n):
    """alpha_n = 2^(2n-2) / ((2n-2)! pi) for n >= 1."""
    if n < 1:
        raise ValueError("alpha_n needs n >= 1")
    return 2.0 ** (2 * n - 2) / (factorial(2 * n - 2) * pi)


def beta(n):
    """beta_n = (2n-1)! alpha_n for n >= 1."""
    return factorial(2 * n - 1) * alpha(n)


@lru_cache(maxsize=None)
def c_const(m, k):
    """c[m]_k for any integer weight m and index k (depends on |k| only)."""
    k = abs(int(k))
    if m >= 1:
        a = alpha(m)
        if k < m:
            return sqrt(a)
        # product of the 2m-1 integers k-m+1 .. k+m-1, kept in floating point
        prod = 1.0
        for j in range(k - m + 1, k + m):
            prod *= j
        return sqrt(a * prod)
    n = 1 - m
    return alpha(n) / c_const(n, k)


def c_vector(m, ks):
    """c[m]_k evaluated on an integer array ``ks``."""
    return np.array([c_const(m, int(k)) for k in np.ravel(ks)], dtype=float).reshape(np.shape(ks))


def sgn(n, k):
    """sgn_n k = +1 for k >= n, -1 otherwise."""
    return 1 if k >= n else -1


def index_factor(n):
    """6n^2 - 6n + 1, the exponent relating det N_n to det N_1."""
    return 6 * n * n - 6 * n + 1


@dataclass(frozen=True)
class WeightConstants:
    n: int

    @property
    def alpha(self):
        return alpha(self.n if self.n >= 1 else 1 - self.n)

    @property
    def beta(self):
        return beta(self.n if self.n >= 1 else 1 - self.n)

    def c_of_k(self, k):
        return c_const(self.n, k)

    def __call__(self, k):
        return c_const(self.n, k)
