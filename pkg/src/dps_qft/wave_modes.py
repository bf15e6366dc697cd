"""Plane-wave solutions of the lattice Klein-Gordon, Maxwell and Dirac equations.

Time stays continuous.  A field is kept as a finite sum of lattice profiles
times pure phases e^{-i f t}, so time derivatives are exact multiplications.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hermite_basis import xi_column
from .lattice_calculus import METRIC, LatticeBox, LatticeField, delta_sharp, laplacian_spatial


def omega(k, mass: float = 0.0):
    """+sqrt(|k|^2 + mass^2) along the last axis."""
    if mass < 0:
        raise ValueError("mass must be non-negative")
    k = np.asarray(k, dtype=float)
    # scaled so tiny momenta or masses do not underflow to zero
    scale = np.maximum(np.max(np.abs(k), axis=-1), mass)
    safe = np.where(scale > 0, scale, 1.0)
    ks = k / np.expand_dims(safe, -1)
    return scale * np.sqrt(np.sum(ks * ks, axis=-1) + (mass / safe) ** 2)


def plane_wave(box: LatticeBox, k, conjugate: bool = False) -> np.ndarray:
    """prod_j xi_{n^j}(k_j) over the box (conjugated on request)."""
    k = np.asarray(k, dtype=float)
    if k.shape != (box.dim,):
        raise ValueError("k must have one component per box axis")
    out = np.ones((), dtype=complex)
    for a, n in enumerate(box.extents):
        col = xi_column(n - 1, k[a])
        if conjugate:
            col = np.conj(col)
        out = np.multiply.outer(out, col)
    return out


def scalar_mode(n, k, t: float, sign: str, mu: float) -> complex:
    """[2 omega]^{-1/2} prod xi_{n^j}(k_j) e^{-i omega t}, or its conjugate pattern for sign '+'."""
    n = tuple(int(x) for x in n)
    k = np.asarray(k, dtype=float)
    w = float(omega(k, mu))
    val = 1.0 + 0j
    for nj, kj in zip(n, k):
        val *= xi_column(nj, kj)[nj]
    if sign == "-":
        return complex(val * np.exp(-1j * w * t) / np.sqrt(2 * w))
    if sign == "+":
        return complex(np.conj(val) * np.exp(1j * w * t) / np.sqrt(2 * w))
    raise ValueError("sign must be '-' or '+'")


@dataclass
class Harmonic:
    """sum_j F_j(n) exp(-i f_j t) with lattice profiles F_j."""

    terms: list = field(default_factory=list)  # (frequency, LatticeField)

    def add(self, freq: float, prof: LatticeField) -> "Harmonic":
        self.terms.append((float(freq), prof))
        return self

    def at(self, t: float, dt: int = 0) -> LatticeField:
        out = None
        for f, prof in self.terms:
            term = prof.scale((-1j * f) ** dt * np.exp(-1j * f * t))
            out = term if out is None else out + term
        return out

    def spatial(self, op) -> "Harmonic":
        return Harmonic([(f, op(prof)) for f, prof in self.terms])

    def __add__(self, other: "Harmonic") -> "Harmonic":
        return Harmonic(self.terms + other.terms)

    def scale(self, c) -> "Harmonic":
        return Harmonic([(f, prof.scale(c)) for f, prof in self.terms])

    def conj(self) -> "Harmonic":
        return Harmonic([(-f, p.with_values(np.conj(p.values))) for f, p in self.terms])

    def matmul_left(self, mat) -> "Harmonic":
        """Apply a constant matrix to spinor-valued profiles (last axis)."""
        return Harmonic([(f, p.with_values(p.values @ np.asarray(mat).T)) for f, p in self.terms])

    def matmul_right(self, mat) -> "Harmonic":
        """Row-spinor profiles times a constant matrix."""
        return Harmonic([(f, p.with_values(p.values @ np.asarray(mat))) for f, p in self.terms])


def _as_field(box: LatticeBox, values) -> LatticeField:
    return LatticeField(box, np.asarray(values, dtype=complex), tuple(box.extents))


def scalar_wave(box: LatticeBox, k, mu: float, amp_minus: complex = 1.0, amp_plus: complex = 0.0,
                freq=None) -> Harmonic:
    """a [2w]^{-1/2} X e^{-iwt} + b* [2w]^{-1/2} conj(X) e^{iwt}; ``freq`` detunes."""
    w = float(omega(k, mu)) if freq is None else float(freq)
    norm = 1.0 / np.sqrt(2.0 * float(omega(k, mu)))
    x = plane_wave(box, k)
    h = Harmonic()
    if amp_minus != 0:
        h.add(w, _as_field(box, amp_minus * norm * x))
    if amp_plus != 0:
        h.add(-w, _as_field(box, amp_plus * norm * np.conj(x)))
    return h


def _max_abs(f: LatticeField) -> float:
    v = f.interior()
    return float(np.max(np.abs(v))) if v.size else 0.0


def kg_residual(k, mu: float, box: LatticeBox, t_samples=(0.0,), freq=None, amplitude: complex = 1.0) -> float:
    """max |lap phi - d_t^2 phi - mu^2 phi| for a single mode (both frequency parts)."""
    if box.dim != 3:
        raise ValueError("box must be 3-dimensional")
    h = scalar_wave(box, k, mu, amplitude, amplitude, freq)
    if not h.terms:
        return 0.0
    lap = h.spatial(laplacian_spatial)
    worst = 0.0
    for t in t_samples:
        r = lap.at(t) - h.at(t, 2) - h.at(t).scale(mu * mu)
        worst = max(worst, _max_abs(r))
    return worst


def maxwell_residual(k, box: LatticeBox, t_samples=(0.0,), polarization=(1, 1, 1, 1), freq=None) -> float:
    """Per-component wave-equation residual of an on-shell photon mode."""
    field4 = [scalar_wave(box, k, 0.0, p, np.conj(p), freq) for p in polarization]
    return maxwell_residual_fields(field4, t_samples)


def maxwell_residual_fields(components, t_samples=(0.0,)) -> float:
    worst = 0.0
    for h in components:
        if not h.terms:
            continue
        lap = h.spatial(laplacian_spatial)
        for t in t_samples:
            worst = max(worst, _max_abs(lap.at(t) - h.at(t, 2)))
    return worst


def gauge_shift_fields(components, omega_field: Harmonic):
    """A_mu - d#_mu Omega, with d#_4 the time derivative."""
    out = []
    for mu, h in enumerate(components):
        if mu < 3:
            d = omega_field.spatial(lambda f, a=mu: delta_sharp(f, a))
        else:
            d = Harmonic([(f, p.scale(-1j * f)) for f, p in omega_field.terms])
        out.append(h + d.scale(-1.0))
    return out


def covariant_mode(box4: LatticeBox, k3, mu: float, k4=None) -> LatticeField:
    """prod_mu xi_{n^mu}(k_mu) on a 4-dimensional box, on shell unless k4 is given."""
    k3 = np.asarray(k3, dtype=float)
    k4 = -float(omega(k3, mu)) if k4 is None else float(k4)
    return _as_field(box4, plane_wave(box4, np.append(k3, k4)))


# Dirac matrices, signature (+, +, +, -)

_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class GammaSet:
    gammas: tuple

    def __getitem__(self, mu: int) -> np.ndarray:
        return self.gammas[mu]

    def slash(self, p_lower) -> np.ndarray:
        """gamma^mu p_mu for a covariant 4-vector."""
        return sum(self.gammas[mu] * p_lower[mu] for mu in range(4))

    def to_json(self) -> dict:
        return {f"gamma{mu + 1}": [[[float(z.real), float(z.imag)] for z in row] for row in g]
                for mu, g in enumerate(self.gammas)}


def gamma_default() -> GammaSet:
    zero = np.zeros((2, 2), dtype=complex)
    gs = [np.block([[zero, s], [s, zero]]) for s in _SIGMA]
    gs.append(1j * np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex))
    for g in gs:
        g.setflags(write=False)
    return GammaSet(tuple(gs))


def clifford_defect(gs: GammaSet) -> float:
    eye = np.eye(4)
    return max(float(np.max(np.abs(gs[m] @ gs[n] + gs[n] @ gs[m] - 2 * METRIC[m, n] * eye)))
               for m in range(4) for n in range(4))


def dirac_spinors(p, m: float, gs: GammaSet | None = None):
    """(u_1, u_2, v_1, v_2) with u^dagger u = v^dagger v = E/m."""
    if m <= 0:
        raise ValueError("Dirac spinors need m > 0")
    gs = gamma_default() if gs is None else gs
    p = np.asarray(p, dtype=float)
    e = float(omega(p, m))
    ps = gs.slash(np.append(p, -e))
    norm = np.sqrt(2.0 * m * (e + m))
    eye = np.eye(4)
    u = [(-1j * ps + m * eye) @ eye[:, 2 + r] / norm for r in range(2)]
    v = [(1j * ps + m * eye) @ eye[:, r] / norm for r in range(2)]
    return u[0], u[1], v[0], v[1]


def dirac_wave(box: LatticeBox, p, m: float, kind: str, r: int, amplitude: complex = 1.0,
               freq=None, gs: GammaSet | None = None, spinor=None) -> Harmonic:
    """u_r X e^{-iEt} (kind 'u') or v_r conj(X) e^{iEt} (kind 'v'), spinor on the last axis."""
    u1, u2, v1, v2 = dirac_spinors(p, m, gs)
    e = float(omega(p, m)) if freq is None else float(freq)
    if spinor is None:
        spinor = {("u", 0): u1, ("u", 1): u2, ("v", 0): v1, ("v", 1): v2}[(kind, r)]
    x = plane_wave(box, p, conjugate=(kind == "v"))
    vals = amplitude * x[..., None] * np.asarray(spinor)
    return Harmonic([(e if kind == "u" else -e, _as_field(box, vals))])


def dirac_operator(h: Harmonic, m: float, gs: GammaSet, t: float, sign: float = 1.0) -> LatticeField:
    """gamma^j d#_j psi + gamma^4 d_t psi + sign * m psi at time t."""
    out = h.matmul_left(gs[3]).at(t, 1) + h.at(t).scale(sign * m)
    for j in range(3):
        out = out + h.spatial(lambda f, a=j: delta_sharp(f, a)).matmul_left(gs[j]).at(t)
    return out


def adjoint_field(h: Harmonic, gs: GammaSet) -> Harmonic:
    """psi~ = i psi^dagger gamma^4 as row spinors."""
    return h.conj().matmul_right(gs[3]).scale(1j)


def adjoint_operator(ht: Harmonic, m: float, gs: GammaSet, t: float) -> LatticeField:
    """(d#_j psi~) gamma^j + (d_t psi~) gamma^4 - m psi~."""
    out = ht.matmul_right(gs[3]).at(t, 1) - ht.at(t).scale(m)
    for j in range(3):
        out = out + ht.spatial(lambda f, a=j: delta_sharp(f, a)).matmul_right(gs[j]).at(t)
    return out


def dirac_residual(p, m: float, box: LatticeBox, t_samples=(0.0,), freq=None, spinor_scale: float = 1.0) -> dict:
    """Max residuals of the Dirac equation and its adjoint for both branches."""
    gs = gamma_default()
    out = {}
    for kind in ("u", "v"):
        worst, worst_adj = 0.0, 0.0
        for r in range(2):
            h = dirac_wave(box, p, m, kind, r, spinor_scale, freq, gs)
            ht = adjoint_field(h, gs)
            for t in t_samples:
                worst = max(worst, _max_abs(dirac_operator(h, m, gs, t)))
                worst_adj = max(worst_adj, _max_abs(adjoint_operator(ht, m, gs, t)))
        out[kind] = worst
        out[kind + "_adjoint"] = worst_adj
    return out


# Photon polarization tetrad and the restricted gauge shift

def tetrad_build(k) -> np.ndarray:
    """Rows e_(lambda)^mu for lambda = 1..4."""
    k = np.asarray(k, dtype=float)
    nu = float(omega(k))
    if nu == 0:
        raise ValueError("tetrad undefined at k = 0")
    e3 = np.append(k / nu, 0.0)
    e4 = np.array([0.0, 0.0, 0.0, 1.0])
    khat = k / nu
    # seeds x, y, z in order, skipping any with a short residual; a residual
    # below 0.1 would amplify cancellation error, and one of the seeds always
    # clears it.  For k along x this gives the pair (y, z)
    basis = []
    for s in np.eye(3):
        v = s - np.dot(s, khat) * khat
        for b in basis:
            v = v - np.dot(v, b) * b
        if np.linalg.norm(v) > 0.1:
            basis.append(v / np.linalg.norm(v))
        if len(basis) == 2:
            break
    e1, e2 = (np.append(b, 0.0) for b in basis)
    return np.array([e1, e2, e3, e4])


def restricted_gauge_shift(a_lower, k) -> np.ndarray:
    """a_mu - nu^{-2} k_mu (k_b a^b) with k_4 = -nu."""
    a = np.asarray(a_lower, dtype=complex)
    k = np.asarray(k, dtype=float)
    nu = float(omega(k))
    if nu == 0:
        raise ValueError("gauge shift undefined at k = 0")
    k4 = np.append(k, -nu)
    kb_ab = np.dot(k, a[:3])  # spatial indices are raised with +1
    return a - k4 * kb_ab / nu ** 2
