"""Field operators on the lattice, conserved quantities and their mode-sum oracles.

A field at t = 0 is a LinearForm over canonical ladders: its coefficient on
register r at site n is the momentum integral of the register's momentum
profile G_r(k) against prod_j xi_{n^j}(k_j).  Two families of registers are
provided:

* point modes: one register per node of a Gauss-Hermite product grid,
  G_r = delta / sqrt(w_r), so a(k_r) = c_r / sqrt(w_r);
* packet modes: orthonormal Hermite-function packets in momentum space,
  integrated on a finer Gauss-Hermite grid.  Their lattice sums converge as
  the site box grows, which point modes cannot do.

Quadratic observables are kept as ladder-coefficient blocks (see fock), so
lattice sums and mode sums are compared exactly as operators without building
Fock matrices; small instances are also realized as matrices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, sparse

from .fock import (FockRep, LadderAlgebra, LinearForm, ModeSet, QuadraticForm, build_boson_rep,
                   build_fermion_rep, build_photon_rep, comm, relative_form_error, sum_product)
from .hermite_basis import f_column, gauss_hermite, xi_column
from .lattice_calculus import METRIC, LatticeBox, LatticeField, _shift, delta_right, delta_sharp
from .wave_modes import (GammaSet, Harmonic, adjoint_field, dirac_wave, gamma_default, omega,
                         scalar_wave, tetrad_build)

ELECTRON_CHARGE = -math.sqrt(4 * math.pi / 137)
ETA = np.diag(METRIC)


# momentum registers

@dataclass(frozen=True)
class ModeBasis:
    """Per-axis fine nodes, dk weights and register profiles G_a (M_a x Q_a)."""

    kind: str
    nodes: tuple
    measures: tuple
    profiles: tuple
    labels: np.ndarray

    @property
    def shape(self) -> tuple:
        return tuple(p.shape[0] for p in self.profiles)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @classmethod
    def point(cls, shape) -> "ModeBasis":
        shape = (shape,) * 3 if np.isscalar(shape) else tuple(shape)
        rules = [gauss_hermite(s) for s in shape]
        profiles = tuple(np.diag(1.0 / np.sqrt(r.measure)).astype(complex) for r in rules)
        ms = ModeSet.product_grid(shape)
        return cls("point", tuple(r.nodes for r in rules), tuple(r.measure for r in rules), profiles, ms.momenta)

    @classmethod
    def packets(cls, shape, fine_order: int = 32, width: float = 1.0, center=(0.0, 0.0, 0.0)) -> "ModeBasis":
        """Registers G_m(k) = f_m((k - c) / width) / sqrt(width) per axis."""
        shape = (shape,) * 3 if np.isscalar(shape) else tuple(shape)
        rule = gauss_hermite(fine_order)
        profiles, labels = [], []
        for a, m in enumerate(shape):
            if m > fine_order // 2:
                raise ValueError("packet count per axis must stay below half the fine order")
            u = (rule.nodes - center[a]) / width
            profiles.append(f_column(m - 1, u).astype(complex) / math.sqrt(width))
            labels.append(center[a] + width * gauss_hermite(m).nodes)
        grid = np.stack(np.meshgrid(*labels, indexing="ij"), -1).reshape(-1, 3)
        return cls("packet", (rule.nodes,) * 3, (rule.measure,) * 3, tuple(profiles), grid)

    def mode_set(self, mass: float = 0.0) -> ModeSet:
        """Register labels with the weights used by the Fock builders.

        Point registers keep their d^3k weights.  Packet registers are already
        canonical, so their weights are 1.
        """
        if self.kind == "point":
            w = np.einsum("i,j,k->ijk", *self.measures).reshape(-1)
            return ModeSet(self.labels, w, mass)
        return ModeSet(self.labels, np.ones(self.size), mass)

    def grid(self):
        return np.meshgrid(*self.nodes, indexing="ij")

    def kernel(self, g_table) -> np.ndarray:
        """K_rs = int g conj(G_r) G_s d^3k on the fine grid."""
        cg = [np.conj(p) * m for p, m in zip(self.profiles, self.measures)]
        k = np.einsum("ai,bj,ck,ijk,di,ej,fk->abcdef", cg[0], cg[1], cg[2], g_table,
                      *self.profiles, optimize=True)
        return k.reshape(self.size, self.size)

    def profile(self, s_table, n_box) -> np.ndarray:
        """U_r(n) = int G_r(k) s(k) prod_j xi_{n^j}(k_j) d^3k, shape (R, N1, N2, N3, *extra)."""
        n_box = (n_box,) * 3 if np.isscalar(n_box) else tuple(n_box)
        b = [np.einsum("mq,nq->mnq", p * m, xi_column(n - 1, x))
             for p, m, x, n in zip(self.profiles, self.measures, self.nodes, n_box)]
        u = np.einsum("aiq,bjr,cks,qrs...->abcijk...", b[0], b[1], b[2], s_table, optimize=True)
        return u.reshape((self.size,) + u.shape[3:])


def _omega_table(basis: ModeBasis, mass: float) -> np.ndarray:
    k1, k2, k3 = basis.grid()
    return np.sqrt(k1 * k1 + k2 * k2 + k3 * k3 + mass * mass)


def _symbols(basis: ModeBasis, w: np.ndarray) -> dict:
    """Multipliers for the field, its d#_j and its d_t on the e^{-iwt} branch."""
    k = basis.grid()
    out = {"id": np.ones_like(w), "dt": -1j * w}
    for j in range(3):
        out[f"d{j}"] = 1j * k[j]
    return out


# field operators

@dataclass
class FieldOperatorLattice:
    """Linear forms for a field and its derivatives at t = 0 on [0, N)^3."""

    species: str
    basis: ModeBasis
    n_box: tuple
    mass: float
    alg: LadderAlgebra
    forms: dict = field(default_factory=dict)

    def __getitem__(self, name) -> LinearForm:
        return self.forms[name]

    def dagger(self, name) -> LinearForm:
        return self.forms[name].adjoint()

    def site_matrix(self, rep: FockRep, name, n, component=None):
        lf = self.forms[name][tuple(n)] if component is None else self.forms[name][tuple(n) + (component,)]
        return lf.to_matrix(rep)


def _n_box(n_box):
    return (n_box,) * 3 if np.isscalar(n_box) else tuple(int(x) for x in n_box)


def assemble_scalar_field(basis: ModeBasis, n_box, mu: float = 1.0) -> FieldOperatorLattice:
    """phi(n, 0) = sum_r [c_r U_r(n) + d_r^dag conj U_r(n)], U from (2w)^{-1/2} G_r X.

    Registers: a-particles 0..R-1, then b-particles R..2R-1.
    """
    n_box = _n_box(n_box)
    w = _omega_table(basis, mu)
    if np.any(w == 0):
        raise ValueError("the fine grid contains k = 0 for a massless field")
    R = basis.size
    alg = LadderAlgebra("boson", np.ones(2 * R))
    out = FieldOperatorLattice("scalar", basis, n_box, mu, alg)
    for name, sym in _symbols(basis, w).items():
        u = basis.profile(sym / np.sqrt(2 * w), n_box)
        ann = np.zeros((2 * R,) + u.shape[1:], dtype=complex)
        cre = np.zeros_like(ann)
        ann[:R] = u
        cre[R:] = np.conj(u)
        out.forms["phi" if name == "id" else name] = LinearForm(ann, cre)
    return out


def assemble_photon_field(basis: ModeBasis, n_box) -> FieldOperatorLattice:
    """A_mu(n, 0) per family; registers family-major, the temporal family last."""
    n_box = _n_box(n_box)
    nu = _omega_table(basis, 0.0)
    if np.any(nu == 0):
        raise ValueError("the photon fine grid must avoid k = 0 (use an even order)")
    R = basis.size
    alg = LadderAlgebra("boson", np.repeat(ETA, R))
    out = FieldOperatorLattice("photon", basis, n_box, 0.0, alg)
    for name, sym in _symbols(basis, nu).items():
        u = basis.profile(sym / np.sqrt(2 * nu), n_box)
        for mu in range(4):
            ann = np.zeros((4 * R,) + u.shape[1:], dtype=complex)
            cre = np.zeros_like(ann)
            ann[mu * R:(mu + 1) * R] = u
            cre[mu * R:(mu + 1) * R] = np.conj(u)
            out.forms[("A" if name == "id" else name, mu)] = LinearForm(ann, cre)
    return out


def spinor_tables(basis: ModeBasis, m: float, gs: GammaSet | None = None):
    """sqrt(m/E) u_s and sqrt(m/E) v_s on the fine grid, shape (Q, Q, Q, 4) each."""
    gs = gamma_default() if gs is None else gs
    k = basis.grid()
    e = np.sqrt(k[0] ** 2 + k[1] ** 2 + k[2] ** 2 + m * m)
    ps = sum(gs[j] * k[j][..., None, None] for j in range(3)) - gs[3] * e[..., None, None]
    eye = np.eye(4)
    norm = (np.sqrt(2 * m * (e + m)) / np.sqrt(m / e))[..., None]
    u = [(-1j * ps + m * eye)[..., :, 2 + s] / norm for s in range(2)]
    v = [(1j * ps + m * eye)[..., :, s] / norm for s in range(2)]
    return u, v, e


def assemble_dirac_field(basis: ModeBasis, n_box, m: float = 1.0, gs: GammaSet | None = None) -> FieldOperatorLattice:
    """psi(n, 0) with registers alpha(s, r) at sR + r and beta(s, r) at 2R + sR + r."""
    if m <= 0:
        raise ValueError("m must be positive")
    n_box = _n_box(n_box)
    u, v, e = spinor_tables(basis, m, gs)
    R = basis.size
    alg = LadderAlgebra("fermion", np.ones(4 * R))
    out = FieldOperatorLattice("dirac", basis, n_box, m, alg)
    for name, sym in _symbols(basis, e).items():
        ann = np.zeros((4 * R,) + n_box + (4,), dtype=complex)
        cre = np.zeros_like(ann)
        for s in range(2):
            ann[s * R:(s + 1) * R] = basis.profile(u[s] * sym[..., None], n_box)
            cre[(2 + s) * R:(3 + s) * R] = np.conj(basis.profile(np.conj(v[s]) * sym[..., None], n_box))
        out.forms["psi" if name == "id" else name] = LinearForm(ann, cre)
    return out


# conserved quantities

@dataclass
class ConservedSet:
    P: list
    H: QuadraticForm
    Q: QuadraticForm
    alg: LadderAlgebra
    normal_ordered: bool = False

    def ordered(self) -> "ConservedSet":
        return ConservedSet([p.normal_ordered(self.alg) for p in self.P], self.H.normal_ordered(self.alg),
                            self.Q.normal_ordered(self.alg), self.alg, True)

    @property
    def zero_point(self) -> float:
        """The c-number left in H by normal ordering."""
        return float(np.real(self.H.normal_ordered(self.alg).const))

    def quantities(self) -> dict:
        out = {f"P{j + 1}": p for j, p in enumerate(self.P)}
        out["H"] = self.H
        out["Q"] = self.Q
        return out

    def matrices(self, rep: FockRep) -> dict:
        return {name: q.to_matrix(rep) for name, q in self.quantities().items()}


def conserved_scalar(fl: FieldOperatorLattice, e: float = 1.0) -> ConservedSet:
    """Lattice sums over the box of the momentum, energy and charge densities."""
    phi, dt = fl["phi"], fl["dt"]
    d = [fl[f"d{j}"] for j in range(3)]
    mu2 = fl.mass ** 2
    H = sum_product(phi.adjoint(), phi).scale(mu2) + sum_product(dt.adjoint(), dt)
    for j in range(3):
        H = H + sum_product(d[j].adjoint(), d[j])
    P = [(sum_product(dt.adjoint(), d[j]) + sum_product(d[j].adjoint(), dt)).scale(-1.0) for j in range(3)]
    Q = (sum_product(phi.adjoint(), dt) + sum_product(dt.adjoint(), phi).scale(-1.0)).scale(1j * e)
    return ConservedSet(P, H, Q, fl.alg)


def _block(n_reg, pieces):
    """QuadraticForm with A/B blocks placed on register ranges."""
    q = QuadraticForm.zeros(n_reg)
    for which, start, mat in pieces:
        sl = slice(start, start + len(mat))
        getattr(q, which)[sl, sl] += mat
    return q


def _kernels(basis: ModeBasis, mass: float) -> dict:
    k = basis.grid()
    w = _omega_table(basis, mass)
    out = {"one": basis.kernel(np.ones_like(w)), "w": basis.kernel(w)}
    for j in range(3):
        out[f"k{j}"] = basis.kernel(k[j])
    return out


def mode_sum_scalar(basis: ModeBasis, mu: float = 1.0, e: float = 1.0) -> ConservedSet:
    """int g (a^dag a + b b^dag) for P and H, e int (a^dag a - b b^dag) for Q, unordered."""
    R = basis.size
    K = _kernels(basis, mu)
    P = [_block(2 * R, [("A", 0, K[f"k{j}"]), ("B", R, K[f"k{j}"].T)]) for j in range(3)]
    H = _block(2 * R, [("A", 0, K["w"]), ("B", R, K["w"].T)])
    Q = _block(2 * R, [("A", 0, e * K["one"]), ("B", R, -e * K["one"].T)])
    return ConservedSet(P, H, Q, LadderAlgebra("boson", np.ones(2 * R)))


def conserved_photon(fl: FieldOperatorLattice, flipped_momentum: bool = False) -> ConservedSet:
    """Lattice momentum and energy of the four-potential; Q is identically zero.

    The momentum is -sum (d#_j A^mu)(d_t A_mu), the same canonical recipe as the
    scalar field.  ``flipped_momentum=True`` drops the minus sign so the
    other convention can be measured against the mode sum.
    """
    n = fl.alg.size
    sign = 1.0 if flipped_momentum else -1.0
    P = []
    for j in range(3):
        acc = QuadraticForm.zeros(n)
        for mu in range(4):
            acc = acc + sum_product(fl[(f"d{j}", mu)].scale(ETA[mu]), fl[("dt", mu)])
        P.append(acc.scale(sign))
    H = QuadraticForm.zeros(n)
    for mu in range(4):
        for a in range(3):
            H = H + sum_product(fl[(f"d{a}", mu)].scale(ETA[mu]), fl[(f"d{a}", mu)]).scale(0.5)
        H = H + sum_product(fl[("dt", mu)].scale(ETA[mu]), fl[("dt", mu)]).scale(0.5)
    return ConservedSet(P, H, QuadraticForm.zeros(n), fl.alg)


def mode_sum_photon(basis: ModeBasis) -> ConservedSet:
    """(1/2) int eta^{mu nu} (a_mu^dag a_nu + a_mu a_nu^dag) g d^3k."""
    R = basis.size
    K = _kernels(basis, 0.0)

    def form(kk):
        return _block(4 * R, [(blk, mu * R, 0.5 * ETA[mu] * (kk if blk == "A" else kk.T))
                              for mu in range(4) for blk in ("A", "B")])

    return ConservedSet([form(K[f"k{j}"]) for j in range(3)], form(K["w"]), QuadraticForm.zeros(4 * R),
                        LadderAlgebra("boson", np.repeat(ETA, R)))


def conserved_dirac(fl: FieldOperatorLattice, e: float = ELECTRON_CHARGE) -> ConservedSet:
    """(i/2) sums of psi^dag d psi for P_j and H; e sum psi^dag psi for Q."""
    psi, dt = fl["psi"], fl["dt"]
    ad = psi.adjoint()
    P = [(sum_product(fl[f"d{j}"].adjoint(), psi) + sum_product(ad, fl[f"d{j}"]).scale(-1.0)).scale(0.5j)
         for j in range(3)]
    H = (sum_product(ad, dt) + sum_product(dt.adjoint(), psi).scale(-1.0)).scale(0.5j)
    Q = sum_product(ad, psi).scale(e)
    return ConservedSet(P, H, Q, fl.alg)


def mode_sum_dirac(basis: ModeBasis, m: float = 1.0, e: float = ELECTRON_CHARGE) -> ConservedSet:
    """int g (alpha^dag alpha - beta beta^dag) for P, H; e int (alpha^dag alpha + beta beta^dag) for Q."""
    R = basis.size
    K = _kernels(basis, m)

    def form(kk, sb, scale=1.0):
        pieces = [("A", s * R, scale * kk) for s in range(2)]
        pieces += [("B", (2 + s) * R, scale * sb * kk.T) for s in range(2)]
        return _block(4 * R, pieces)

    return ConservedSet([form(K[f"k{j}"], -1.0) for j in range(3)], form(K["w"], -1.0), form(K["one"], 1.0, e),
                        LadderAlgebra("fermion", np.ones(4 * R)))


SPECIES = ("scalar", "photon", "dirac")


def lattice_and_mode_sets(species: str, basis: ModeBasis, n_box, mass: float = 1.0, e: float | None = None):
    if species == "scalar":
        e = 1.0 if e is None else e
        fl = assemble_scalar_field(basis, n_box, mass)
        return fl, conserved_scalar(fl, e), mode_sum_scalar(basis, mass, e)
    if species == "photon":
        fl = assemble_photon_field(basis, n_box)
        return fl, conserved_photon(fl), mode_sum_photon(basis)
    if species == "dirac":
        e = ELECTRON_CHARGE if e is None else e
        fl = assemble_dirac_field(basis, n_box, mass)
        return fl, conserved_dirac(fl, e), mode_sum_dirac(basis, mass, e)
    raise ValueError(f"unknown species {species!r}")


def oracle_equivalence(species: str, basis: ModeBasis, n_box, mass: float = 1.0, e: float | None = None) -> list:
    """Relative operator distance between lattice sums and mode sums, per quantity."""
    _, lat, mode = lattice_and_mode_sets(species, basis, n_box, mass, e)
    # momenta are measured against the energy scale since |k| <= omega; a
    # symmetric packet set has a vanishing momentum oracle
    h_scale = float(np.linalg.norm(mode.H.normal_ordered(mode.alg).blocks()))
    out = []
    for name, lq in lat.quantities().items():
        mq = mode.quantities()[name]
        if species == "photon" and name == "Q":
            continue
        scale = h_scale if name.startswith("P") else 0.0
        err = relative_form_error(lq, mq, lat.alg, scale)
        ref = max(float(np.linalg.norm(mq.normal_ordered(mode.alg).blocks())), scale)
        out.append({
            "species": species, "modes": basis.size, "N_box": list(_n_box(n_box)), "quantity": name,
            "lattice_value": float(np.linalg.norm(lq.normal_ordered(lat.alg).blocks())),
            "mode_sum_value": ref, "abs_err": err["blocks"] * ref, "rel_err": err["blocks"],
            "normal_ordered": True, "zero_point_rel_err": err["zero_point"],
            "zero_point": [float(np.real(err["lattice_zero_point"])), float(np.real(err["mode_zero_point"]))],
        })
    return out


def single_particle_charges(cs: ConservedSet) -> np.ndarray:
    """<1_r|Q|1_r> - <0|Q|0> for every register, read off the ordered form."""
    return np.real(np.diag(cs.Q.normal_ordered(cs.alg).A))


def vacuum_energy(cs: ConservedSet) -> float:
    return cs.zero_point


# generators on small Fock representations

def _restrict(mat, mask):
    idx = np.flatnonzero(mask)
    return sparse.csr_matrix(mat)[idx][:, idx]


def _max_abs(mat) -> float:
    mat = sparse.csr_matrix(mat)
    return float(abs(mat).max()) if mat.nnz else 0.0


def generator_check(rep: FockRep, fl: FieldOperatorLattice, cs: ConservedSet, site, e: float = 1.0,
                    sub_cutoff: bool = True) -> list:
    """Commutators of P_j, H, Q with the scalar field at one site.

    Both signs of the momentum relation are reported: the one following from
    the field expansion, [P_j, phi] = +i d#_j phi, and the opposite one.
    """
    mats = cs.matrices(rep)
    mask = rep.sub_cutoff_mask() if sub_cutoff else np.ones(rep.dim, dtype=bool)
    phi = fl.site_matrix(rep, "phi", site)
    recs = []

    def rec(name, mat, tol):
        d = _max_abs(_restrict(mat, mask))
        recs.append({"name": name, "measured": d, "tolerance": tol, "pass": d <= tol})

    for j in range(3):
        dphi = fl.site_matrix(rep, f"d{j}", site)
        c = comm(mats[f"P{j + 1}"], phi)
        rec(f"[P{j + 1}, phi] - i d#{j + 1} phi", c - 1j * dphi, 1e-10)
        rec(f"[P{j + 1}, phi] + i d#{j + 1} phi", c + 1j * dphi, 1e-10)
    rec("[H, phi] + i d_t phi", comm(mats["H"], phi) + 1j * fl.site_matrix(rep, "dt", site), 1e-10)
    rec("[Q, phi] + e phi", comm(mats["Q"], phi) + e * phi, 1e-10)
    for j in range(3):
        rec(f"[H, P{j + 1}]", comm(mats["H"], mats[f"P{j + 1}"]), 1e-12)
        rec(f"[P{j + 1}, Q]", comm(mats[f"P{j + 1}"], mats["Q"]), 1e-12)
    rec("[H, Q]", comm(mats["H"], mats["Q"]), 1e-12)
    return recs


def hermiticity_defect(rep: FockRep, cs: ConservedSet) -> float:
    out = 0.0
    for mat in cs.matrices(rep).values():
        out = max(out, _max_abs(mat - rep.eta_adjoint(mat)))
    return out


def normal_ordering_offset(rep: FockRep, cs: ConservedSet) -> float:
    """max |H - :H: - zero_point I| as matrices on the sub-cutoff block."""
    h = cs.H.to_matrix(rep)
    hn = cs.H.normal_ordered(cs.alg)
    z = hn.const
    hn = QuadraticForm(hn.A, hn.B, hn.C, hn.D, 0.0).to_matrix(rep)
    diff = h - hn - z * sparse.identity(rep.dim, format="csr")
    return _max_abs(_restrict(diff, rep.sub_cutoff_mask()))


def wrong_statistics_defect(basis: ModeBasis, n_box, mu: float = 1.0) -> dict:
    """[H, Q] for the scalar lattice sums realized with bosonic and with fermionic ladders."""
    fl = assemble_scalar_field(basis, n_box, mu)
    cs = conserved_scalar(fl)
    ms = basis.mode_set(mu)
    out = {}
    for label, rep in (("boson", build_boson_rep(ms, 2)), ("fermion", build_fermion_rep(ms, spins=1))):
        h, q = cs.H.to_matrix(rep), cs.Q.to_matrix(rep)
        c = comm(h, q)
        if label == "boson":
            c = _restrict(c, rep.sub_cutoff_mask())
        out[label] = _max_abs(c)
    return out


# photon polarization structure

def polarization_report(k, weight: float = 1.0, cutoff: int = 2, seed: int = 0, samples: int = 8) -> dict:
    """Tetrad decomposition of the mode-sum energy for a single photon mode.

    Physical states are taken from the null space of a_(3) + a_(4), which is
    k_mu a^mu / nu; they satisfy <k_mu a^mu> = 0.  The non-transverse part of
    the normal-ordered energy must vanish on them.
    """
    k = np.asarray(k, dtype=float)
    nu = float(omega(k))
    ms = ModeSet([k], [weight])
    rep = build_photon_rep(ms, cutoff)
    e = tetrad_build(k)
    # a_(lambda) = e_(lambda)^mu a_mu, contracting the tetrad's upper index with the register's lower one
    lower = e
    a = [rep.ann(mu) for mu in range(4)]
    c = [rep.cre(mu) for mu in range(4)]
    al = [sum(lower[lam, mu] * a[mu] for mu in range(4)) for lam in range(4)]
    cl = [sum(lower[lam, mu] * c[mu] for mu in range(4)) for lam in range(4)]
    w = weight
    h_full = (sum(0.5 * ETA[mu] * (c[mu] @ a[mu] + a[mu] @ c[mu]) for mu in range(4)) * nu * w).tocsr()
    h_trans = (sum(cl[lam] @ al[lam] for lam in range(2)) * nu * w).tocsr()
    h_nt = (sum(ETA[lam] * (cl[lam] @ al[lam]) for lam in (2, 3)) * nu * w).tocsr()
    vac = np.zeros(rep.dim, dtype=complex)
    vac[0] = 1.0
    zero_full = rep.inner(vac, h_full @ vac).real
    # the tetrad form of the ordered energy equals the covariant one
    h_ordered = (sum(ETA[mu] * (c[mu] @ a[mu]) for mu in range(4)) * nu * w).tocsr()
    tetrad_defect = _max_abs(h_ordered - h_trans - h_nt)

    kmu = np.append(k, -nu)
    lorentz = sum(kmu[mu] * ETA[mu] * a[mu] for mu in range(4))  # k_mu a^mu
    constraint = (al[2] + al[3]).toarray()
    null = linalg.null_space(constraint)
    rng = np.random.default_rng(seed)
    worst_nt, worst_lorentz = 0.0, 0.0
    for _ in range(samples):
        coeffs = rng.normal(size=null.shape[1]) + 1j * rng.normal(size=null.shape[1])
        psi = null @ coeffs
        psi /= np.linalg.norm(psi)
        worst_nt = max(worst_nt, abs(rep.inner(psi, h_nt @ psi)))
        worst_lorentz = max(worst_lorentz, abs(rep.inner(psi, lorentz @ psi)))

    one = cl[0] @ vac
    norm1 = rep.inner(one, one).real
    e_one = rep.inner(one, h_full @ one).real / norm1
    e_one_trans = rep.inner(one, h_trans @ one).real / norm1
    # zero-point kept by the transverse-only form: (1/2) delta(0) per polarization, two polarizations
    zero_trans = nu
    return {
        "nu": nu,
        "physical_subspace_dim": int(null.shape[1]),
        "nontransverse_energy_on_physical_states": worst_nt,
        "lorentz_condition_on_physical_states": worst_lorentz,
        "tetrad_decomposition_defect": tetrad_defect,
        "vacuum_energy_covariant": zero_full,
        "vacuum_energy_transverse": zero_trans,
        "vacuum_energy_nontransverse": zero_full - zero_trans,
        "one_photon_energy_covariant": e_one,
        "one_photon_energy_transverse_form": e_one_trans + zero_trans,
        "one_photon_expected": nu * (1.0 + 1.0),
    }


# equal-time structure

def equal_time_scalar(basis: ModeBasis, n_box, mu: float = 1.0) -> dict:
    """[d_t phi(n), phi^dag(nh)], [phi(n), phi(nh)], [d_t phi(n), (d_t phi(nh))^dag] as site arrays."""
    fl = assemble_scalar_field(basis, n_box, mu)
    N = int(np.prod(fl.n_box))
    phi = fl["phi"]
    dt = fl["dt"]
    flat = lambda lf: LinearForm(lf.ann.reshape(len(lf.ann), N), lf.cre.reshape(len(lf.cre), N))
    return {
        "dt_phi_dag": flat(dt).bracket(flat(phi.adjoint()), fl.alg),
        "phi_phi": flat(phi).bracket(flat(phi), fl.alg),
        "dt_dtdag": flat(dt).bracket(flat(dt.adjoint()), fl.alg),
    }


def equal_time_dirac(basis: ModeBasis, n_box, m: float = 1.0) -> np.ndarray:
    """{psi_c(n), psi_d(nh)^dag} reshaped to (sites*4, sites*4)."""
    fl = assemble_dirac_field(basis, n_box, m)
    psi = fl["psi"]
    n = int(np.prod(fl.n_box)) * 4
    flat = LinearForm(psi.ann.reshape(len(psi.ann), n), psi.cre.reshape(len(psi.cre), n))
    return flat.bracket(flat.adjoint(), fl.alg)


def equal_time_photon(basis: ModeBasis, n_box) -> np.ndarray:
    """[d_t A_mu(n), A_nu(nh)] as (4, sites, 4, sites)."""
    fl = assemble_photon_field(basis, n_box)
    N = int(np.prod(fl.n_box))
    flat = lambda lf: LinearForm(lf.ann.reshape(len(lf.ann), N), lf.cre.reshape(len(lf.cre), N))
    out = np.zeros((4, N, 4, N), dtype=complex)
    for mu in range(4):
        for nu in range(4):
            out[mu, :, nu, :] = flat(fl[("dt", mu)]).bracket(flat(fl[("A", nu)]), fl.alg)
    return out


def delta_pattern_error(mat: np.ndarray, diag_value: complex) -> dict:
    """Worst off-diagonal magnitude and worst relative diagonal deviation from diag_value."""
    d = np.diag(mat)
    off = mat - np.diag(d)
    return {"off_diagonal": float(np.max(np.abs(off))),
            "diagonal": float(np.max(np.abs(d - diag_value)) / abs(diag_value))}


# c-number stress tensors

def _dt(h: Harmonic) -> Harmonic:
    return Harmonic([(f, p.scale(-1j * f)) for f, p in h.terms])


def _sharp(h: Harmonic, axis: int) -> Harmonic:
    return h.spatial(lambda fld, a=axis: delta_sharp(fld, a))


def _down(f: LatticeField, axis: int) -> LatticeField:
    """f(n - e_axis), zero at n^axis = 0."""
    return f.with_values(_shift(f.values, axis, -1))


def _sqrt_half_n(f: LatticeField, axis: int) -> np.ndarray:
    shape = [1] * f.values.ndim
    shape[axis] = f.box.extents[axis]
    return np.sqrt(np.arange(f.box.extents[axis]) / 2.0).reshape(shape)


def _mul(f: LatticeField, g: LatticeField) -> LatticeField:
    """Site-wise product, contracting a trailing row/column spinor index if present."""
    v = f.values * g.values
    if v.ndim > f.dim:
        v = v.sum(axis=-1)
    valid = tuple(min(a, b) for a, b in zip(f.valid, g.valid))
    return LatticeField(f.box, v, valid)


def _pair(f, g, axis):
    return _mul(_down(f, axis), g) + _mul(f, _down(g, axis))


def _X(f, g, axis):
    p = _pair(f, g, axis)
    return p.with_values(_sqrt_half_n(p, axis) * p.values)


def _prod(F: Harmonic, G: Harmonic, t: float, dt: int = 0) -> LatticeField:
    if dt == 0:
        return _mul(F.at(t), G.at(t))
    return _mul(F.at(t, 1), G.at(t)) + _mul(F.at(t), G.at(t, 1))


def _residual(tb: list, t4_dt: LatticeField) -> float:
    out = t4_dt
    for b, tab in enumerate(tb):
        out = out + delta_right(tab, b)
    v = out.interior()
    return float(np.max(np.abs(v))) if v.size else 0.0


class _ScalarT:
    def __init__(self, h: Harmonic, mu: float):
        self.phi, self.phid = h, h.conj()
        self.mu2 = mu * mu
        self.d = [_sharp(h, a) for a in range(3)]
        self.dd = [_sharp(self.phid, a) for a in range(3)]
        self.pi = [x.scale(-1.0) for x in self.dd]  # dL/d rho_b
        self.pid = [x.scale(-1.0) for x in self.d]
        self.pi4, self.pi4d = _dt(self.phid), _dt(h)
        self.lterms = [(self.phid, h, -self.mu2), (_dt(self.phid), _dt(h), 1.0)]
        self.lterms += [(self.dd[c], self.d[c], -1.0) for c in range(3)]

    def lagrangian(self, t, dt=0):
        out = None
        for f, g, c in self.lterms:
            term = _prod(f, g, t, dt).scale(c)
            out = term if out is None else out + term
        return out

    def x_lagrangian(self, t, axis, literal=False):
        out = None
        for f, g, c in self.lterms:
            term = (_pair if literal else _X)(f.at(t), g.at(t), axis).scale(c)
            out = term if out is None else out + term
        return out


def _scalar_residuals(h: Harmonic, mu: float, t: float, variant: str) -> dict:
    s = _ScalarT(h, mu)
    literal = variant == "literal"
    out = {}
    for a in range(4):
        tb = []
        for b in range(3):
            if a < 3:
                f1, g1 = s.pi[b].at(t), s.d[a].at(t)
                f2, g2 = s.dd[a].at(t), s.pid[b].at(t)
            else:
                f1, g1 = s.pi[b].at(t), _dt(s.phi).at(t)
                f2, g2 = _dt(s.phid).at(t), s.pid[b].at(t)
            if not literal:
                tab = _X(f1, g1, b) + _X(f2, g2, b)
                if a == b:
                    tab = tab - s.x_lagrangian(t, b)
            elif a < 3:
                root = _sqrt_half_n(f1, a)
                tab = (_mul(_down(f1, b), g1).with_values(root * _mul(_down(f1, b), g1).values) + _mul(f1, _down(g1, b))
                       + _mul(_down(f2, b), g2).with_values(root * _mul(_down(f2, b), g2).values) + _mul(f2, _down(g2, b)))
                if a == b:
                    tab = tab + s.x_lagrangian(t, b, literal=True)
            else:
                root = _sqrt_half_n(f1, b)
                tab = (_mul(f1, g1) + _mul(f2, g2))
                tab = tab.with_values(root * tab.values)
            tb.append(tab)
        if a < 3:
            t4 = _prod(s.pi4, s.d[a], t, 1) + _prod(s.dd[a], s.pi4d, t, 1)
        else:
            t4 = _prod(s.pi4, _dt(s.phi), t, 1) + _prod(_dt(s.phid), s.pi4d, t, 1) - s.lagrangian(t, 1)
        out["T_a" if a < 3 else "T_4"] = max(out.get("T_a" if a < 3 else "T_4", 0.0), _residual(tb, t4))
    return out


class _DiracT:
    def __init__(self, h: Harmonic, m: float, gs: GammaSet):
        self.gs, self.m = gs, m
        self.psi = h
        self.psit = adjoint_field(h, gs)
        self.d = [_sharp(h, a) for a in range(3)]
        self.dt_ = [_sharp(self.psit, a) for a in range(3)]
        self.pi = [self.psit.matmul_right(gs[b]).scale(-0.5) for b in range(4)]  # row spinors
        self.pit = [h.matmul_left(gs[b]).scale(0.5) for b in range(4)]  # column spinors
        rho = [*self.d, _dt(h)]
        rhot = [*self.dt_, _dt(self.psit)]
        self.grho = sum((rho[b].matmul_left(gs[b]) for b in range(1, 4)), rho[0].matmul_left(gs[0]))
        self.rhog = sum((rhot[b].matmul_right(gs[b]) for b in range(1, 4)), rhot[0].matmul_right(gs[0]))
        self.lterms = [(self.psit, self.grho, -0.5), (self.rhog, h, 0.5), (self.psit, h, -m)]
        self.rho, self.rhot = rho, rhot

    def lagrangian(self, t, dt=0):
        out = None
        for f, g, c in self.lterms:
            term = _prod(f, g, t, dt).scale(c)
            out = term if out is None else out + term
        return out

    def x_lagrangian(self, t, axis):
        out = None
        for f, g, c in self.lterms:
            term = _X(f.at(t), g.at(t), axis).scale(c)
            out = term if out is None else out + term
        return out

    def literal_bracket(self, t, axis):
        gs = self.gs
        g_d = sum((self.d[c].matmul_left(gs[c]) for c in range(1, 3)), self.d[0].matmul_left(gs[0]))
        d_g = sum((self.dt_[c].matmul_right(gs[c]) for c in range(1, 3)), self.dt_[0].matmul_right(gs[0]))
        pt, p = self.psit.at(t), self.psi.at(t)
        out = _pair(pt, g_d.at(t), axis).scale(0.5)
        out = out + _pair(pt, _dt(self.psi).matmul_left(gs[3]).at(t), axis)
        out = out - _pair(d_g.at(t), p, axis)
        out = out - _pair(_dt(self.psit).matmul_right(gs[3]).at(t), p, axis)
        out = out + _pair(pt, p, axis).scale(self.m)
        return out


def _dirac_residuals(h: Harmonic, m: float, t: float, variant: str, gs: GammaSet) -> dict:
    s = _DiracT(h, m, gs)
    out = {}
    for a in range(4):
        tb = []
        for b in range(3):
            if a < 3:
                tab = _X(s.pi[b].at(t), s.d[a].at(t), b) + _X(s.dt_[a].at(t), s.pit[b].at(t), b)
            else:
                tab = _X(s.pi[b].at(t), _dt(s.psi).at(t), b) + _X(_dt(s.psit).at(t), s.pit[b].at(t), b)
            if a == b:
                if variant == "literal":
                    br = s.literal_bracket(t, b)
                    tab = tab - br.with_values(_sqrt_half_n(br, b) * br.values)
                else:
                    tab = tab - s.x_lagrangian(t, b)
            tb.append(tab)
        if a < 3:
            t4 = _prod(s.pi[3], s.d[a], t, 1) + _prod(s.dt_[a], s.pit[3], t, 1)
        else:
            t4 = _prod(s.pi[3], _dt(s.psi), t, 1) + _prod(_dt(s.psit), s.pit[3], t, 1) - s.lagrangian(t, 1)
        key = "T_a" if a < 3 else "T_4"
        out[key] = max(out.get(key, 0.0), _residual(tb, t4))
    return out


def classical_scalar(box: LatticeBox, modes, mu: float, detune: float = 0.0) -> Harmonic:
    """Sum of on-shell plane waves; modes are (k, amp_minus, amp_plus) triples."""
    h = Harmonic()
    for k, am, ap in modes:
        freq = float(omega(k, mu)) + detune
        h = h + scalar_wave(box, k, mu, am, ap, freq)
    return h


def classical_dirac(box: LatticeBox, modes, m: float, detune: float = 0.0, gs: GammaSet | None = None) -> Harmonic:
    """modes are (p, kind in {'u','v'}, r, amplitude)."""
    h = Harmonic()
    for p, kind, r, amp in modes:
        freq = float(omega(p, m)) + detune
        h = h + dirac_wave(box, p, m, kind, r, amp, freq, gs)
    return h


def stress_conservation_cnumber(species: str, modes, box: LatticeBox, t: float, mass: float = 1.0,
                                detune: float = 0.0, variant: str = "conserved") -> dict:
    """Max residuals of Delta_b T_a^b + d_t T_a^4 and Delta_b T_4^b + d_t T_4^4 over trusted sites.

    ``variant='conserved'`` uses the symmetric displaced products
    X_b[f, g](n) = sqrt(n^b / 2) (f(n - e_b) g(n) + f(n) g(n - e_b)), for
    which the lattice Leibniz rule f d#g + (d#f) g = Delta_b X_b[f, g] makes
    the laws exact.  ``variant='literal'`` is the unsymmetrized
    arrangement, kept for measurement.
    """
    if variant not in ("conserved", "literal"):
        raise ValueError("variant must be 'conserved' or 'literal'")
    if box.dim != 3:
        raise ValueError("needs a 3-dimensional box")
    if species == "scalar":
        return _scalar_residuals(classical_scalar(box, modes, mass, detune), mass, t, variant)
    if species == "dirac":
        gs = gamma_default()
        return _dirac_residuals(classical_dirac(box, modes, mass, detune, gs), mass, t, variant, gs)
    raise ValueError(f"unknown species {species!r}")
