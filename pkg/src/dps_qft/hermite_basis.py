"""Hermite polynomials, Hermite functions f_n and the phased basis xi_n = i^n f_n.

Everything is evaluated through the normalized three-term recurrence so the
functions stay bounded for large n; H_n itself is only offered for small n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_hermite

PI_QUARTER = math.pi ** -0.25

# i^n by n mod 4, so the phase never drifts
_PHASE = np.array([1.0, 1.0j, -1.0, -1.0j])


def phase(n):
    """Exact i**n for integer n (array aware)."""
    return _PHASE[np.asarray(n) % 4]


def hermite(n: int, k):
    """Physicists' Hermite polynomial H_n(k) by H_{n+1} = 2k H_n - 2n H_{n-1}.

    Raises OverflowError when the value leaves the double range; use f() for
    large n.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    k = np.asarray(k, dtype=float)
    h_prev, h = np.ones_like(k), 2.0 * k
    if n == 0:
        out = h_prev
    else:
        with np.errstate(over="ignore", invalid="ignore"):
            for j in range(1, n):
                h_prev, h = h, 2.0 * k * h - 2.0 * j * h_prev
        out = h
    if not np.all(np.isfinite(out)):
        raise OverflowError(f"H_{n} overflows double precision at the requested k")
    return out[()] if out.ndim == 0 else out


def f_column(n_max: int, k):
    """Rows f_0..f_{n_max} evaluated at k, shape (n_max+1, *k.shape)."""
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    k = np.asarray(k, dtype=float)
    out = np.empty((n_max + 1,) + k.shape)
    out[0] = PI_QUARTER * np.exp(-0.5 * k * k)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * k * out[0]
    for n in range(1, n_max):
        out[n + 1] = k * math.sqrt(2.0 / (n + 1)) * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def f(n: int, k):
    """Normalized Hermite function f_n(k); zero for negative n."""
    if n < 0:
        return np.zeros_like(np.asarray(k, dtype=float))[()]
    return f_column(n, k)[n][()]


def xi_column(n_max: int, k):
    """xi_0(k)..xi_{n_max}(k) in one recurrence pass, complex."""
    col = f_column(n_max, k)
    ph = _PHASE[np.arange(n_max + 1) % 4].reshape((-1,) + (1,) * (col.ndim - 1))
    return col * ph


def xi(n: int, k):
    """xi_n(k) = i^n f_n(k); the extension xi_{-n-1} = 0 is honoured."""
    if n < 0:
        return np.zeros_like(np.asarray(k, dtype=float), dtype=complex)[()]
    return (phase(n) * f_column(n, k)[n])[()]


def christoffel_darboux(N: int, k: float, kh: float) -> complex:
    """(k - kh) * sum_{n<=N} conj(xi_n(k)) xi_n(kh) by direct summation."""
    a = xi_column(N, k)
    b = xi_column(N, kh)
    return complex((k - kh) * np.sum(np.conj(a) * b))


def christoffel_darboux_closed(N: int, k: float, kh: float) -> complex:
    """Closed two-term form of the Christoffel-Darboux sum."""
    a = xi_column(N + 1, k)
    b = xi_column(N + 1, kh)
    return complex(1j * math.sqrt((N + 1) / 2.0)
                   * (np.conj(a[N + 1]) * b[N] - np.conj(b[N + 1]) * a[N]))


def generating_function_partial(t: float, k: float, N: int) -> complex:
    """Partial sum sum_{n<=N} xi_n(k) t^n / sqrt(n!)."""
    if abs(t) > 1.0:
        raise ValueError("partial sums are only supported for |t| <= 1")
    col = xi_column(N, k)
    n = np.arange(N + 1)
    if t == 0:
        return complex(col[0])
    # t^n / sqrt(n!) through logs to avoid overflow
    logs = n * np.log(abs(t)) - 0.5 * np.array([math.lgamma(j + 1) for j in n])
    coef = np.exp(logs) * np.sign(t) ** n
    return complex(np.sum(col * coef))


def generating_function_closed(t: float, k: float, unnormalized: bool = False) -> complex:
    """Closed form of the xi generating function.

    The default is the form that follows from the Hermite generating function,
    pi^{-1/4} exp((t^2 - k^2)/2 + i sqrt(2) t k). ``unnormalized=True`` returns
    exp((t^2 + k^2)/2 + i sqrt(2) t k) without the pi^{-1/4} prefactor, kept so
    the discrepancy can be measured.
    """
    if unnormalized:
        return complex(np.exp(0.5 * (t * t + k * k) + 1j * math.sqrt(2.0) * t * k))
    return complex(PI_QUARTER * np.exp(0.5 * (t * t - k * k) + 1j * math.sqrt(2.0) * t * k))


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite rule for integrals of exp(-k^2) g(k)."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    @property
    def measure(self) -> np.ndarray:
        """Weights for plain dk, i.e. weights * exp(k^2)."""
        return self.weights * np.exp(self.nodes ** 2)

    def integrate(self, g) -> float:
        return np.sum(self.weights * g(self.nodes))


@lru_cache(maxsize=64)
def _gauss_hermite_cached(order: int):
    x, w = roots_hermite(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_hermite(order: int) -> QuadratureRule:
    """Gauss-Hermite nodes and weights (Golub-Welsch / asymptotic, via scipy)."""
    if order < 1:
        raise ValueError("order must be >= 1")
    x, w = _gauss_hermite_cached(int(order))
    if not (np.all(np.isfinite(w)) and np.all(w > 0) and np.all(np.isfinite(np.exp(x ** 2)))):
        raise OverflowError(f"Gauss-Hermite order {order} is not representable in double precision")
    return QuadratureRule(nodes=x, weights=w, order=int(order))


def overlap_gram(n_max: int, rule: QuadratureRule) -> np.ndarray:
    """Matrix of int conj(xi_m) xi_n dk using the rule's dk measure."""
    col = xi_column(n_max, rule.nodes)
    return (np.conj(col) * rule.measure) @ col.T


def completeness_kernel(N: int, k, p, conjugated: bool = False):
    """Partial sum of conj(xi_n(k)) xi_n(p), or of xi_n(k) xi_n(p) if conjugated."""
    a = xi_column(N, k)
    b = xi_column(N, p)
    left = a if conjugated else np.conj(a)
    return np.einsum("n...,n...->...", left, b)


def smeared_completeness(N: int, g, rule: QuadratureRule, conjugated: bool = False) -> complex:
    """int int conj(g(k)) K_N(k, p) g(p) dk dp for a smooth test function g."""
    x, m = rule.nodes, rule.measure
    col = xi_column(N, x)
    gx = g(x)
    left = col if conjugated else np.conj(col)
    proj_left = left @ (m * np.conj(gx))
    proj_right = col @ (m * gx)
    return complex(np.sum(proj_left * proj_right))


def fourier_self_map_check(n: int, k: float, order: int) -> float:
    """|xi_n(k) - (2 pi)^{-1/2} int f_n(x) e^{ikx} dx| by quadrature."""
    rule = gauss_hermite(order)
    x, m = rule.nodes, rule.measure
    integral = np.sum(m * f(n, x) * np.exp(1j * k * x)) / math.sqrt(2.0 * math.pi)
    return float(abs(xi(n, k) - integral))


def addition_theorem_sides(n: int, k: float, p: float) -> tuple[complex, complex]:
    """Both sides of the Hermite-function addition theorem."""
    lhs = 2.0 ** (n / 2) * math.exp(-((k - p) / 2) ** 2) * xi(n, (k + p) / math.sqrt(2.0))
    a = xi_column(n, k)
    b = xi_column(n, p)
    rhs = PI_QUARTER ** -1 * sum(math.sqrt(math.comb(n, j)) * a[n - j] * b[j] for j in range(n + 1))
    return complex(lhs), complex(rhs)
