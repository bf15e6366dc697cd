"""Truncated Fock-space matrices for bosons, photons (indefinite metric) and fermions.

Momentum integrals are replaced by weighted sums over a finite mode set, with
delta^3(k - kh) -> delta_ij / w_i.  Each register i carries a canonical ladder
c_i ([c_i, c_i^dag] = +-1); the density ladders are a_i = c_i / sqrt(w_i).

Two numerical gauges are offered.  ``exact=False`` gives the usual unitary
matrices (entries sqrt(n)) in complex floating point.  ``exact=True`` gives an
integer realization similar to it by diag(sqrt(n!)): the annihilator has
entries n and the creator entries 1.  A similarity transform preserves every
commutator identity and, being diagonal, the location of the truncation
defect, so the integer matrices let the algebra be checked with zero
rounding.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .hermite_basis import gauss_hermite

DEFAULT_BUDGET = 4096
DEFAULT_FERMION_REGISTERS = 12


@dataclass(frozen=True)
class ModeSet:
    """Momentum nodes and the weights standing in for d^3k."""

    momenta: np.ndarray
    weights: np.ndarray
    mass: float = 0.0

    def __post_init__(self):
        k = np.atleast_2d(np.asarray(self.momenta, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if k.shape[1] != 3 or len(k) != len(w):
            raise ValueError("momenta must be (M, 3) with one weight each")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if len({tuple(r) for r in k}) != len(k):
            raise ValueError("momenta must be distinct")
        object.__setattr__(self, "momenta", k)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.weights)

    @classmethod
    def product_grid(cls, shape, mass: float = 0.0) -> "ModeSet":
        """Gauss-Hermite product grid; weights are the plain d^3k measure."""
        shape = (shape,) * 3 if np.isscalar(shape) else tuple(shape)
        rules = [gauss_hermite(s) for s in shape]
        nodes = np.stack(np.meshgrid(*[r.nodes for r in rules], indexing="ij"), -1).reshape(-1, 3)
        w = np.einsum("i,j,k->ijk", *[r.measure for r in rules]).reshape(-1)
        return cls(nodes, w, mass)

    def subset(self, idx) -> "ModeSet":
        idx = list(idx)
        return ModeSet(self.momenta[idx], self.weights[idx], self.mass)

    def gaussian_integral(self) -> float:
        """sum_i w_i exp(-|k_i|^2), which must reproduce pi^{3/2} on grids."""
        return float(np.sum(self.weights * np.exp(-np.sum(self.momenta ** 2, axis=1))))

    def frequencies(self, mass: float | None = None) -> np.ndarray:
        m = self.mass if mass is None else mass
        return np.sqrt(np.sum(self.momenta ** 2, axis=1) + m * m)

    def is_symmetric(self) -> bool:
        keys = {tuple(np.round(r, 12) + 0.0) for r in self.momenta}
        return all(tuple(np.round(-r, 12) + 0.0) in keys for r in self.momenta)


@dataclass(frozen=True)
class Register:
    label: tuple
    statistics: str  # "boson" | "fermion"
    metric: int  # commutator sign of the canonical ladder
    weight: float


def _local_boson(cutoff: int, exact: bool):
    n = np.arange(1, cutoff + 1)
    if exact:
        ann = sparse.diags(n.astype(np.int64), 1, shape=(cutoff + 1, cutoff + 1), format="csr", dtype=np.int64)
        cre = sparse.diags(np.ones(cutoff, dtype=np.int64), -1, shape=(cutoff + 1, cutoff + 1), format="csr", dtype=np.int64)
    else:
        ann = sparse.diags(np.sqrt(n).astype(complex), 1, shape=(cutoff + 1, cutoff + 1), format="csr")
        cre = ann.T.tocsr()
    return ann, cre


def _local_fermion(exact: bool):
    dt = np.int64 if exact else complex
    ann = sparse.csr_matrix(np.array([[0, 1], [0, 0]]), dtype=dt)
    z = sparse.csr_matrix(np.diag([1, -1]), dtype=dt)
    return ann, ann.T.tocsr(), z


def _embed(ops, dims, dt):
    out = sparse.identity(1, dtype=dt, format="csr")
    for op, d in zip(ops, dims):
        out = sparse.kron(out, op if op is not None else sparse.identity(d, dtype=dt, format="csr"), format="csr")
    return out


@dataclass
class FockRep:
    kind: str
    modes: ModeSet
    cutoff: int
    registers: list
    dims: list
    exact: bool
    _ann: list = field(repr=False, default_factory=list)
    _cre: list = field(repr=False, default_factory=list)
    metric_operator: sparse.spmatrix = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def dtype(self):
        return np.int64 if self.exact else complex

    def index(self, *label) -> int:
        for i, r in enumerate(self.registers):
            if r.label == tuple(label):
                return i
        raise KeyError(label)

    def canonical_ann(self, r: int):
        return self._ann[r]

    def canonical_cre(self, r: int):
        return self._cre[r]

    def ann(self, r: int):
        """Density annihilator c_r / sqrt(w_r); canonical in the exact gauge."""
        if self.exact:
            return self._ann[r]
        return self._ann[r] / np.sqrt(self.registers[r].weight)

    def cre(self, r: int):
        if self.exact:
            return self._cre[r]
        return self._cre[r] / np.sqrt(self.registers[r].weight)

    def identity(self):
        return sparse.identity(self.dim, dtype=self.dtype, format="csr")

    def occupations(self) -> np.ndarray:
        """(dim, R) table of basis-state occupation numbers."""
        grids = np.indices(self.dims).reshape(len(self.dims), -1).T
        return grids

    def sub_cutoff_mask(self) -> np.ndarray:
        occ = self.occupations()
        bos = [i for i, r in enumerate(self.registers) if r.statistics == "boson"]
        if not bos:
            return np.ones(self.dim, dtype=bool)
        return np.all(occ[:, bos] < self.cutoff, axis=1)

    def inner(self, chi, psi) -> complex:
        """Metric form <chi|G|psi>."""
        return complex(np.vdot(chi, self.metric_operator @ psi))

    def eta_adjoint(self, op):
        g = self.metric_operator
        return (g @ op.conj().T @ g).tocsr()


def _check_budget(dim, budget):
    if dim > budget:
        raise MemoryError(f"Fock dimension {dim} exceeds the budget {budget}")


def _assemble(kind, modes, cutoff, registers, exact, budget):
    dims = [cutoff + 1 if r.statistics == "boson" else 2 for r in registers]
    dim = int(np.prod(dims))
    _check_budget(dim, budget)
    dt = np.int64 if exact else complex
    bann, bcre = _local_boson(cutoff, exact) if cutoff >= 1 else (None, None)
    fann, fcre, z = _local_fermion(exact)
    anns, cres = [], []
    for i, r in enumerate(registers):
        ops_a = [None] * len(registers)
        ops_c = [None] * len(registers)
        if r.statistics == "boson":
            ops_a[i], ops_c[i] = bann, bcre
        else:
            for j in range(i):
                if registers[j].statistics == "fermion":
                    ops_a[j] = ops_c[j] = z
            ops_a[i], ops_c[i] = fann, fcre
        a = _embed(ops_a, dims, dt)
        c = _embed(ops_c, dims, dt)
        if r.metric < 0:
            c = -c  # eta-adjoint of a temporal annihilator
        anns.append(a)
        cres.append(c)
    parity = np.ones(dim, dtype=np.int64)
    occ = np.indices(dims).reshape(len(dims), -1).T
    for i, r in enumerate(registers):
        if r.metric < 0:
            parity = parity * (-1) ** occ[:, i]
    g = sparse.diags(parity.astype(dt), 0, format="csr")
    return FockRep(kind, modes, cutoff, registers, dims, exact, anns, cres, g)


def build_boson_rep(modes: ModeSet, cutoff: int, charged: bool = True, exact: bool = False,
                    budget: int = DEFAULT_BUDGET) -> FockRep:
    """Registers a_0..a_{M-1}, then b_0..b_{M-1} if charged."""
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    regs = [Register(("a", i), "boson", 1, w) for i, w in enumerate(modes.weights)]
    if charged:
        regs += [Register(("b", i), "boson", 1, w) for i, w in enumerate(modes.weights)]
    return _assemble("boson", modes, cutoff, regs, exact, budget)


def build_photon_rep(modes: ModeSet, cutoff: int, exact: bool = False, budget: int = DEFAULT_BUDGET) -> FockRep:
    """Four families a_(mu, i), family-major; the temporal family has negative metric."""
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    regs = [Register(("a", mu, i), "boson", -1 if mu == 3 else 1, w)
            for mu in range(4) for i, w in enumerate(modes.weights)]
    return _assemble("photon", modes, cutoff, regs, exact, budget)


def build_fermion_rep(modes: ModeSet, spins: int = 2, exact: bool = False,
                      max_registers: int = DEFAULT_FERMION_REGISTERS) -> FockRep:
    """alpha block then beta block; spin-major, mode-minor inside each block."""
    if spins not in (1, 2):
        raise ValueError("spins must be 1 or 2")
    regs = [Register((sp, r, i), "fermion", 1, w)
            for sp in ("alpha", "beta") for r in range(spins) for i, w in enumerate(modes.weights)]
    if len(regs) > max_registers:
        raise MemoryError(f"{len(regs)} fermionic registers exceed the limit {max_registers}")
    return _assemble("fermion", modes, 1, regs, exact, 2 ** max_registers)


def number_operator(rep: FockRep, r: int):
    """w_r a_r^dag a_r, an occupation count (negative spectrum for the temporal photon family)."""
    if rep.exact:
        return (rep.cre(r) @ rep.ann(r)).tocsr()
    return (rep.cre(r) @ rep.ann(r) * rep.registers[r].weight).tocsr()


def density_operator(rep: FockRep, r: int):
    """a_r^dag a_r, the discretized number density N(k_r)."""
    return (rep.cre(r) @ rep.ann(r)).tocsr()


def vacuum(rep: FockRep) -> np.ndarray:
    v = np.zeros(rep.dim, dtype=complex)
    v[0] = 1.0
    return v


def comm(a, b, anti: bool = False):
    return (a @ b + b @ a) if anti else (a @ b - b @ a)


# identity checking

@dataclass
class Record:
    identity: str
    max_defect: float
    location: object
    tolerance: float
    passed: bool
    full_defect: float = 0.0

    def as_dict(self) -> dict:
        return {"identity": self.identity, "max_defect": self.max_defect, "location": self.location,
                "tolerance": self.tolerance, "pass": self.passed, "full_defect": self.full_defect}


def _defect(rep: FockRep, mat, mask):
    mat = sparse.csr_matrix(mat)
    full = float(abs(mat).max()) if mat.nnz else 0.0
    if mask is not None:
        idx = np.flatnonzero(mask)
        sub = mat[idx][:, idx]
    else:
        idx = np.arange(rep.dim)
        sub = mat
    sub = sparse.coo_matrix(sub)
    if sub.nnz == 0:
        return 0.0, None, full
    vals = np.abs(sub.data)
    j = int(np.argmax(vals))
    if vals[j] == 0:
        return 0.0, None, full
    occ = rep.occupations()
    loc = (occ[idx[sub.row[j]]].tolist(), occ[idx[sub.col[j]]].tolist())
    return float(vals[j]), loc, full


class _Suite:
    def __init__(self, rep: FockRep, tol: float):
        self.rep = rep
        self.tol = 0.0 if rep.exact else tol
        self.mask = rep.sub_cutoff_mask()
        self.records: list[Record] = []

    def check(self, name, mat, restrict=True):
        d, loc, full = _defect(self.rep, mat, self.mask if restrict else None)
        self.records.append(Record(name, d, loc, self.tol, d <= self.tol, full))


def _scale(rep: FockRep, r: int) -> float:
    """1/w_r in the float gauge, 1 in the canonical integer gauge."""
    return 1.0 if rep.exact else 1.0 / rep.registers[r].weight


def ladder_commutator_suite(rep: FockRep, tol: float = 1e-12) -> list[Record]:
    """Check every ladder identity; defects are reported with their location.

    Bosonic identities are asserted on the block where every register sits
    below the cutoff; the defect over the full space is kept in
    ``full_defect``.
    """
    s = _Suite(rep, tol)
    R = len(rep.registers)
    eye = rep.identity()
    anti = rep.kind == "fermion"
    br = "{}" if anti else "[]"

    def tag(x, y):
        return f"{br[0]}{x}, {y}{br[1]}"

    for i, j in itertools.product(range(R), range(R)):
        li, lj = rep.registers[i].label, rep.registers[j].label
        expected = eye * (rep.registers[i].metric * _scale(rep, i)) if i == j else eye * 0
        s.check(tag(f"a{li}", f"a{lj}^dag") + " = eta delta/w", comm(rep.ann(i), rep.cre(j), anti) - expected)
        s.check(tag(f"a{li}", f"a{lj}"), comm(rep.ann(i), rep.ann(j), anti), restrict=False)
        s.check(tag(f"a{li}^dag", f"a{lj}^dag"), comm(rep.cre(i), rep.cre(j), anti), restrict=False)

    if not anti:
        for i, j in itertools.product(range(R), range(R)):
            li, lj = rep.registers[i].label, rep.registers[j].label
            dens = density_operator(rep, i)
            g = rep.registers[i].metric * _scale(rep, i) if i == j else 0
            s.check(f"[N{li}, a{lj}^dag] = delta/w a^dag", comm(dens, rep.cre(j)) - g * rep.cre(j))
            s.check(f"[N{li}, a{lj}] = -delta/w a", comm(dens, rep.ann(j)) + g * rep.ann(j), restrict=False)
            s.check(f"[N{li}, N{lj}]", comm(dens, density_operator(rep, j)), restrict=False)
    else:
        for i, j in itertools.product(range(R), range(R)):
            li, lj = rep.registers[i].label, rep.registers[j].label
            s.check(f"[N{li}, N{lj}]", comm(number_operator(rep, i), number_operator(rep, j)), restrict=False)

    vac = vacuum(rep)
    for i in range(R):
        li = rep.registers[i].label
        out = rep.ann(i) @ (vac if not rep.exact else vac.real.astype(np.int64))
        s.check(f"a{li}|0> = 0", sparse.csr_matrix(out.reshape(-1, 1)), restrict=False)
        out = number_operator(rep, i) @ (vac if not rep.exact else vac.real.astype(np.int64))
        s.check(f"N{li}|0> = 0", sparse.csr_matrix(out.reshape(-1, 1)), restrict=False)
    norm = rep.inner(vac, vac) - 1.0
    s.records.append(Record("<0|0> = 1 (metric form)", abs(norm), None, s.tol, abs(norm) <= s.tol))
    return s.records


def statistics_suite(rep: FockRep, tol: float = 1e-12) -> list[Record]:
    """Symmetric (bosons) or antisymmetric (fermions) two-particle states."""
    s = _Suite(rep, tol)
    vac = vacuum(rep)
    if rep.exact:
        vac = vac.real.astype(np.int64)
    R = len(rep.registers)
    sign = -1 if rep.kind == "fermion" else 1
    for i, j in itertools.combinations_with_replacement(range(R), 2):
        ij = rep.cre(i) @ (rep.cre(j) @ vac)
        ji = rep.cre(j) @ (rep.cre(i) @ vac)
        diff = ij - sign * ji
        s.records.append(Record(f"a{rep.registers[i].label}^dag a{rep.registers[j].label}^dag|0> symmetry",
                                float(np.max(np.abs(diff))), None, s.tol, float(np.max(np.abs(diff))) <= s.tol))
        if rep.kind == "fermion" and i == j:
            val = float(np.max(np.abs(ij)))
            s.records.append(Record(f"(a{rep.registers[i].label}^dag)^2|0> = 0", val, None, s.tol, val <= s.tol))
    return s.records


def delta_consistency(rep: FockRep) -> float:
    """sum_i w_i [a_i, a_i^dag] on the sub-cutoff block, minus (#registers) I."""
    if rep.exact:
        raise ValueError("needs the weighted (float) gauge")
    anti = rep.kind == "fermion"
    tot = sum(rep.registers[i].weight * rep.registers[i].metric * comm(rep.ann(i), rep.cre(i), anti)
              for i in range(len(rep.registers)))
    d, _, _ = _defect(rep, tot - len(rep.registers) * rep.identity(), rep.sub_cutoff_mask())
    return d


# Ladder-coefficient forms.  A linear form is sum_r ann[r] c_r + cre[r] c_r^dag
# with canonical ladders; trailing axes index lattice sites or spinor
# components.  Quadratic forms keep the four ordered blocks separately.

@dataclass
class LadderAlgebra:
    statistics: str
    metric: np.ndarray  # per-register commutator sign

    @property
    def size(self) -> int:
        return len(self.metric)

    @classmethod
    def of(cls, rep: FockRep) -> "LadderAlgebra":
        stats = {r.statistics for r in rep.registers}
        if len(stats) != 1:
            raise ValueError("mixed statistics are not supported")
        return cls(stats.pop(), np.array([r.metric for r in rep.registers], dtype=float))


@dataclass
class LinearForm:
    ann: np.ndarray
    cre: np.ndarray

    @property
    def shape(self):
        return self.ann.shape[1:]

    def adjoint(self) -> "LinearForm":
        return LinearForm(np.conj(self.cre), np.conj(self.ann))

    def scale(self, c) -> "LinearForm":
        return LinearForm(c * self.ann, c * self.cre)

    def __add__(self, other: "LinearForm") -> "LinearForm":
        return LinearForm(self.ann + other.ann, self.cre + other.cre)

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        return self + other.scale(-1.0)

    def __getitem__(self, idx) -> "LinearForm":
        if not isinstance(idx, tuple):
            idx = (idx,)
        return LinearForm(self.ann[(slice(None),) + idx], self.cre[(slice(None),) + idx])

    def bracket(self, other: "LinearForm", alg: LadderAlgebra):
        """[L1, L2] for bosons or {L1, L2} for fermions, a c-number per trailing index pair."""
        g = alg.metric.reshape((-1,) + (1,) * len(self.shape))
        sgn = 1.0 if alg.statistics == "fermion" else -1.0
        a1, c1 = self.ann * g, self.cre * g
        return (np.tensordot(a1, other.cre, axes=(0, 0)) + sgn * np.tensordot(c1, other.ann, axes=(0, 0)))

    def to_matrix(self, rep: FockRep):
        if self.shape != ():
            raise ValueError("index a single site/component first")
        out = sparse.csr_matrix((rep.dim, rep.dim), dtype=complex)
        for r in range(len(rep.registers)):
            if self.ann[r] != 0:
                out = out + self.ann[r] * rep.canonical_ann(r)
            if self.cre[r] != 0:
                out = out + self.cre[r] * rep.canonical_cre(r)
        return out


@dataclass
class QuadraticForm:
    """A c^dag c + B c c^dag + C c c + D c^dag c^dag + const (summed r, s)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    const: complex = 0.0

    @classmethod
    def zeros(cls, n: int) -> "QuadraticForm":
        z = np.zeros((n, n), dtype=complex)
        return cls(z.copy(), z.copy(), z.copy(), z.copy(), 0.0)

    @classmethod
    def number_like(cls, normal_block, const=0.0) -> "QuadraticForm":
        q = cls.zeros(len(normal_block))
        q.A = np.asarray(normal_block, dtype=complex)
        q.const = const
        return q

    def __add__(self, o: "QuadraticForm") -> "QuadraticForm":
        return QuadraticForm(self.A + o.A, self.B + o.B, self.C + o.C, self.D + o.D, self.const + o.const)

    def scale(self, c) -> "QuadraticForm":
        return QuadraticForm(c * self.A, c * self.B, c * self.C, c * self.D, c * self.const)

    def normal_ordered(self, alg: LadderAlgebra) -> "QuadraticForm":
        """Move every annihilator right; the c-number goes to const."""
        sgn = -1.0 if alg.statistics == "fermion" else 1.0
        A = self.A + sgn * self.B.T
        const = self.const + np.sum(np.diag(self.B) * alg.metric)
        C, D = self.C, self.D
        if alg.statistics == "fermion":
            C = 0.5 * (C - C.T)
            D = 0.5 * (D - D.T)
        else:
            C = 0.5 * (C + C.T)
            D = 0.5 * (D + D.T)
        z = np.zeros_like(A)
        return QuadraticForm(A, z, C, D, const)

    def blocks(self) -> np.ndarray:
        return np.concatenate([self.A.ravel(), self.B.ravel(), self.C.ravel(), self.D.ravel()])

    def to_matrix(self, rep: FockRep):
        n = len(rep.registers)
        out = sparse.csr_matrix((rep.dim, rep.dim), dtype=complex)
        a = [rep.canonical_ann(r) for r in range(n)]
        c = [rep.canonical_cre(r) for r in range(n)]
        for M, left, right in ((self.A, c, a), (self.B, a, c), (self.C, a, a), (self.D, c, c)):
            for r, s in zip(*np.nonzero(np.abs(M) > 0)):
                out = out + M[r, s] * (left[r] @ right[s])
        return (out + self.const * sparse.identity(rep.dim, format="csr")).tocsr()


def sum_product(l1: LinearForm, l2: LinearForm) -> QuadraticForm:
    """sum over all trailing indices of L1(n) L2(n), preserving operator order."""
    n = l1.ann.shape[0]
    a1 = l1.ann.reshape(n, -1)
    c1 = l1.cre.reshape(n, -1)
    a2 = l2.ann.reshape(n, -1)
    c2 = l2.cre.reshape(n, -1)
    return QuadraticForm(c1 @ a2.T, a1 @ c2.T, a1 @ a2.T, c1 @ c2.T, 0.0)


def relative_form_error(x: QuadraticForm, y: QuadraticForm, alg: LadderAlgebra, scale: float = 0.0) -> dict:
    """Compare normal-ordered blocks (Frobenius) and zero-point constants.

    Errors are relative to the reference form, or to ``scale`` if larger.
    """
    xn, yn = x.normal_ordered(alg), y.normal_ordered(alg)
    ref = max(np.linalg.norm(yn.blocks()), scale)
    blk = np.linalg.norm(xn.blocks() - yn.blocks()) / ref
    const_ref = max(abs(yn.const), ref)
    return {"blocks": float(blk), "zero_point": float(abs(xn.const - yn.const) / const_ref),
            "lattice_zero_point": complex(xn.const), "mode_zero_point": complex(yn.const)}
