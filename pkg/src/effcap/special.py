"""Gamma-family special functions and Gauss-Laguerre quadrature.

All functions are pure and reentrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import special as sps

from .errors import DomainError, NumericError

_MAX_SERIES_TERMS = 10_000


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes/weights for integration against the weight e^{-z} on [0, inf)."""

    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f) -> float:
        return float(np.sum(self.weights * f(self.nodes)))


def gamma_fn(x: float) -> float:
    """Gamma function for real x away from the poles at 0, -1, -2, ..."""
    if not math.isfinite(x):
        raise DomainError(f"gamma_fn requires finite x, got {x}")
    if x <= 0 and x == math.floor(x):
        raise DomainError(f"gamma_fn pole at x={x}")
    return math.gamma(x)


def upper_incomplete_gamma(alpha: float, x: float) -> float:
    """Upper incomplete Gamma function Gamma(alpha, x) for x > 0.

    alpha may be zero or negative; that branch is evaluated through the
    integral representation Gamma(alpha, x) = x^alpha e^{-x}
    * int_0^inf e^{-x t} (1+t)^{alpha-1} dt, which is stable where upward
    recurrences are not.
    """
    if not (x > 0):
        raise DomainError(f"upper_incomplete_gamma requires x > 0, got {x}")
    if alpha > 0:
        return float(sps.gammaincc(alpha, x) * sps.gamma(alpha))

    def integrand(t: float) -> float:
        return math.exp(-x * t) * (1.0 + t) ** (alpha - 1.0)

    val, err = integrate.quad(integrand, 0.0, np.inf, epsabs=0.0,
                              epsrel=1e-12, limit=300)
    if not math.isfinite(val):
        raise NumericError(
            f"upper_incomplete_gamma integral diverged for alpha={alpha}, x={x}")
    return float(x ** alpha * math.exp(-x) * val)


def confluent_1f1(a: float, b: float, z: float) -> float:
    """Confluent hypergeometric series 1F1(a, b, z).

    Straight series summation with a relative term-ratio stopping rule;
    arguments in this package are moderate so no Kummer transformations
    are applied.
    """
    if b <= 0 and b == math.floor(b):
        raise DomainError(f"confluent_1f1 pole at b={b}")
    total = 1.0
    term = 1.0
    for n in range(_MAX_SERIES_TERMS):
        term *= (a + n) / (b + n) * z / (n + 1)
        total += term
        if abs(term) <= 1e-13 * abs(total):
            return total
    raise NumericError(
        f"confluent_1f1 did not converge for a={a}, b={b}, z={z}")


def gauss_laguerre(n: int) -> QuadratureRule:
    """Gauss-Laguerre rule with n points; exact for polynomials up to 2n-1."""
    if not (1 <= n <= 256):
        raise DomainError(f"gauss_laguerre order must be in [1, 256], got {n}")
    nodes, weights = sps.roots_laguerre(n)
    return QuadratureRule(nodes=nodes, weights=weights)
