"""Invariant two-event functions of the lattice scalar and Dirac fields.

Each function is a momentum integral of prod_j xi_{n^j}(k_j) conj(xi_{nh^j}(k_j))
times a function of omega(k) and t - th.  The integral factorizes into three
one-dimensional overlap vectors contracted against a 3D table of that
function, evaluated on a Gauss-Hermite product grid.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .hermite_basis import gauss_hermite, xi_column
from .wave_modes import GammaSet, gamma_default

KINDS = ("plus", "minus", "full", "F")


@dataclass(frozen=True)
class EventPair:
    n: tuple
    nh: tuple
    t: float
    th: float

    def swapped(self) -> "EventPair":
        return EventPair(self.nh, self.n, self.th, self.t)

    def shifted(self, axis: int, step: int) -> "EventPair":
        n = list(self.n)
        n[axis] += step
        return EventPair(tuple(n), self.nh, self.t, self.th)

    def at_time(self, t: float) -> "EventPair":
        return EventPair(self.n, self.nh, t, self.th)


@lru_cache(maxsize=32)
def _grid(order: int, n_max: int):
    rule = gauss_hermite(order)
    col = xi_column(n_max, rule.nodes)
    col.setflags(write=False)
    return rule.nodes, rule.measure, col


def _check_mass(mu: float, order: int):
    if mu < 0:
        raise ValueError("mass must be non-negative")
    if mu == 0 and order % 2:
        raise ValueError("massless functions need an even quadrature order (no node at k = 0)")


def _overlaps(pair: EventPair, order: int):
    n_max = max(max(pair.n), max(pair.nh), 1)
    if min(min(pair.n), min(pair.nh)) < 0:
        return None, None
    x, m, col = _grid(order, n_max)
    return x, [m * col[a] * np.conj(col[b]) for a, b in zip(pair.n, pair.nh)]


def momentum_integral(pair: EventPair, integrand, order: int, mu: float, extra_k=None) -> complex:
    """int prod_j xi_{n^j} conj(xi_{nh^j}) integrand(omega, k) d^3k (factorized)."""
    x, ov = _overlaps(pair, order)
    if ov is None:
        return 0j
    k1, k2, k3 = np.meshgrid(x, x, x, indexing="ij")
    w = np.sqrt(k1 * k1 + k2 * k2 + k3 * k3 + mu * mu)
    table = integrand(w, (k1, k2, k3))
    return complex(np.einsum("i,j,k,ijk->", ov[0], ov[1], ov[2], table, optimize=True))


def momentum_integral_direct(pair: EventPair, integrand, order: int, mu: float) -> complex:
    """Same integral with the full 3D product grid flattened (no factorization)."""
    n_max = max(max(pair.n), max(pair.nh), 1)
    x, m, col = _grid(order, n_max)
    k = np.stack(np.meshgrid(x, x, x, indexing="ij"), -1).reshape(-1, 3)
    idx = np.stack(np.meshgrid(*[np.arange(order)] * 3, indexing="ij"), -1).reshape(-1, 3)
    weight = m[idx[:, 0]] * m[idx[:, 1]] * m[idx[:, 2]]
    xs = np.ones(len(k), dtype=complex)
    for a in range(3):
        xs = xs * col[pair.n[a], idx[:, a]] * np.conj(col[pair.nh[a], idx[:, a]])
    w = np.sqrt(np.sum(k * k, axis=1) + mu * mu)
    return complex(np.sum(weight * xs * integrand(w, tuple(k.T))))


def _branch_integrand(kind: str, tau: float, dt: int = 0, insert=None):
    """Momentum-space integrand for each branch, with dt time derivatives."""

    def plus(w, k):
        return -1j / (2 * w) * (-1j * w) ** dt * np.exp(-1j * w * tau)

    def minus(w, k):
        return 1j / (2 * w) * (1j * w) ** dt * np.exp(1j * w * tau)

    def full(w, k):
        return plus(w, k) + minus(w, k)

    base = {"plus": plus, "minus": minus, "full": full}[kind]
    if insert is None:
        return base
    return lambda w, k: insert(w, k) * base(w, k)


def _scalar(pair: EventPair, mu: float, order: int, kind: str, dt: int = 0, insert=None) -> complex:
    _check_mass(mu, order)
    tau = pair.t - pair.th
    if kind == "full":
        if dt == 0 and insert is None:
            # closed form of the sum: -sin(w tau)/w
            return momentum_integral(pair, lambda w, k: -np.sin(w * tau) / w, order, mu)
    return momentum_integral(pair, _branch_integrand(kind, tau, dt, insert), order, mu)


def delta_plus(pair: EventPair, mu: float, quad_order: int = 32, dt: int = 0) -> complex:
    """-i int (2w)^{-1} X conj(Xh) e^{-i w (t - th)} d^3k."""
    return _scalar(pair, mu, quad_order, "plus", dt)


def delta_minus(pair: EventPair, mu: float, quad_order: int = 32, dt: int = 0) -> complex:
    """i int (2w)^{-1} conj(X) Xh e^{i w (t - th)} d^3k; equals conj(delta_plus)."""
    return _scalar(pair, mu, quad_order, "minus", dt)


def delta_homogeneous(pair: EventPair, mu: float, quad_order: int = 32, dt: int = 0) -> complex:
    """-int X conj(Xh) sin(w (t - th)) / w d^3k, with dt analytic time derivatives."""
    _check_mass(mu, quad_order)
    tau = pair.t - pair.th
    sin_derivs = [
        lambda w: -np.sin(w * tau) / w,
        lambda w: -np.cos(w * tau),
        lambda w: w * np.sin(w * tau),
        lambda w: w * w * np.cos(w * tau),
    ]
    if dt < len(sin_derivs):
        g = sin_derivs[dt]
        return momentum_integral(pair, lambda w, k: g(w), quad_order, mu)
    return _scalar(pair, mu, quad_order, "full", dt)


def delta_feynman(pair: EventPair, mu: float, quad_order: int = 32) -> complex:
    """-theta(t - th) Delta_+ + theta(th - t) Delta_-; undefined at t = th."""
    if pair.t == pair.th:
        raise ValueError("the Feynman function is not defined at equal times")
    if pair.t > pair.th:
        return -delta_plus(pair, mu, quad_order)
    return delta_minus(pair, mu, quad_order)


def massless_d(pair: EventPair, quad_order: int = 32, kind: str = "full") -> complex:
    """The mu = 0 functions; even quadrature order required."""
    _check_mass(0.0, quad_order)
    if kind == "plus":
        return delta_plus(pair, 0.0, quad_order)
    if kind == "minus":
        return delta_minus(pair, 0.0, quad_order)
    if kind == "full":
        return delta_homogeneous(pair, 0.0, quad_order)
    if kind == "F":
        return delta_feynman(pair, 0.0, quad_order)
    raise ValueError(f"unknown kind {kind!r}")


def _ik(j):
    return lambda w, k: 1j * k[j]


def _scalar_kind(pair, m, order, kind, dt=0, insert=None):
    if kind == "F":
        if pair.t == pair.th:
            raise ValueError("the Feynman function is not defined at equal times")
        if pair.t > pair.th:
            return -_scalar(pair, m, order, "plus", dt, insert)
        return _scalar(pair, m, order, "minus", dt, insert)
    return _scalar(pair, m, order, kind, dt, insert)


def s_function(pair: EventPair, m: float, branch: str = "full", quad_order: int = 32,
               gs: GammaSet | None = None) -> np.ndarray:
    """(gamma^j d#_j + gamma^4 d_t - m) applied to the scalar function of the same branch.

    d#_j acts on the first site and becomes i k_j under the integral; d_t is
    analytic.  For branch 'F' the derivative is taken branchwise (t != th).
    """
    if m <= 0:
        raise ValueError("m must be positive")
    if branch not in KINDS:
        raise ValueError(f"unknown branch {branch!r}")
    gs = gamma_default() if gs is None else gs
    out = gs[3] * _scalar_kind(pair, m, quad_order, branch, dt=1) - m * np.eye(4) * _scalar_kind(pair, m, quad_order, branch)
    for j in range(3):
        out = out + gs[j] * _scalar_kind(pair, m, quad_order, branch, insert=_ik(j))
    return out


def s_function_lattice(pair: EventPair, m: float, branch: str = "full", quad_order: int = 32,
                       gs: GammaSet | None = None) -> np.ndarray:
    """Same as s_function but with d#_j as a difference over neighbouring sites."""
    gs = gamma_default() if gs is None else gs
    f = lambda p, dt=0: _scalar_kind(p, m, quad_order, branch, dt)
    out = gs[3] * f(pair, 1) - m * np.eye(4) * f(pair)
    for j in range(3):
        nj = pair.n[j]
        d = (np.sqrt(nj + 1) * f(pair.shifted(j, 1)) - (np.sqrt(nj) * f(pair.shifted(j, -1)) if nj > 0 else 0)) / np.sqrt(2)
        out = out + gs[j] * d
    return out


def _d_dt(fn, pair: EventPair, h: float) -> np.ndarray:
    """Five-point central difference in the first time argument."""
    c = [(-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12)]
    return sum(wt * fn(pair.at_time(pair.t + s * h)) for s, wt in c) / h


def dirac_annihilation_residual(pair: EventPair, m: float, branch: str = "full", quad_order: int = 32,
                                h: float = 1e-4) -> float:
    """max |(gamma^j d#_j + gamma^4 d_t + m) S| with lattice d# and finite-difference d_t."""
    gs = gamma_default()
    s = lambda p: s_function(p, m, branch, quad_order, gs)
    out = gs[3] @ _d_dt(s, pair, h) + m * s(pair)
    for j in range(3):
        nj = pair.n[j]
        d = (np.sqrt(nj + 1) * s(pair.shifted(j, 1)) - (np.sqrt(nj) * s(pair.shifted(j, -1)) if nj > 0 else 0)) / np.sqrt(2)
        out = out + gs[j] @ d
    return float(np.max(np.abs(out)))


def kg_annihilation_residual(pair: EventPair, mu: float, quad_order: int = 32, kind: str = "full") -> float:
    """|sum_j d#_j d#_j Delta - d_t^2 Delta - mu^2 Delta| with lattice d# on the first site."""
    f = lambda p, dt=0: _scalar(p, mu, quad_order, kind, dt) if kind != "full" else delta_homogeneous(p, mu, quad_order, dt)

    def sharp(p, j, inner):
        nj = p.n[j]
        lo = np.sqrt(nj) * inner(p.shifted(j, -1)) if nj > 0 else 0.0
        return (np.sqrt(nj + 1) * inner(p.shifted(j, 1)) - lo) / np.sqrt(2)

    lap = sum(sharp(pair, j, lambda q, j=j: sharp(q, j, f)) for j in range(3))
    return float(abs(lap - f(pair, 2) - mu * mu * f(pair)))
