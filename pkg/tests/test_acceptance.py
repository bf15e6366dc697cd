"""The nine acceptance criteria at their stated tolerances, one PASS/FAIL line each."""
import time

import numpy as np
import pytest

from dps_qft import fock, greens, hermite_basis as hb, lattice_calculus as lc
from dps_qft import observables as ob, wave_modes as wm

from conftest import ACCEPTANCE_LINES

RNG = np.random.default_rng(20240601)


class Criterion:
    """Collects named (measured, limit) checks and reports one line."""

    def __init__(self, label, runtime_limit=None):
        self.label, self.limit = label, runtime_limit
        self.items = []

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def le(self, name, measured, tol):
        self.items.append((name, float(measured), tol, float(measured) <= tol))

    def gt(self, name, measured, bound):
        self.items.append((name, float(measured), bound, float(measured) > bound))

    def __exit__(self, *exc):
        elapsed = time.perf_counter() - self.t0
        if self.limit is not None:
            self.le("runtime [s]", elapsed, self.limit)
        failed = [i for i in self.items if not i[3]]
        ok = exc[0] is None and not failed
        detail = "; ".join(f"{n} {m:.2e}" for n, m, _, passed in self.items if not passed) or f"{len(self.items)} checks"
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {self.label}  ({detail}, {elapsed:.1f} s)")
        print(ACCEPTANCE_LINES[-1])
        assert not failed, failed
        return False


def test_criterion_1_basis_identities():
    with Criterion("1 basis identities", 10.0) as c:
        gram = hb.overlap_gram(20, hb.gauss_hermite(80))
        c.le("orthonormality", np.max(np.abs(gram - np.eye(21))), 1e-13)
        k = RNG.uniform(-5, 5, 200)
        col, colm = hb.xi_column(40, k), hb.xi_column(40, -k)
        sign = (-1.0) ** np.arange(41)[:, None]
        c.le("parity", np.max(np.abs(colm - sign * col)), 1e-14)
        c.le("conjugation", np.max(np.abs(colm - np.conj(col))), 1e-14)
        cd = max(abs(hb.christoffel_darboux(N, a, b) - hb.christoffel_darboux_closed(N, a, b))
                 for N in range(31) for a, b in RNG.uniform(-3, 3, (4, 2)))
        c.le("Christoffel-Darboux", cd, 1e-12)
        add = max(abs(np.subtract(*hb.addition_theorem_sides(n, a, b)))
                  for n in range(11) for a, b in RNG.uniform(-2, 2, (6, 2)))
        c.le("addition theorem", add, 1e-11)
        fs = max(hb.fourier_self_map_check(n, kk, 120) for n in range(21) for kk in RNG.uniform(-3, 3, 6))
        c.le("Fourier self-map", fs, 1e-8)


def test_criterion_2_eigenrelation():
    with Criterion("2 eigenrelation", 1.0) as c:
        worst = 0.0
        for k in np.linspace(-3, 3, 50):
            fld = lc.LatticeField.from_values(hb.xi_column(41, k))
            out = lc.delta_sharp(fld, 0)
            worst = max(worst, float(np.max(np.abs(out.interior()[:41] - 1j * k * fld.values[:41]))))
        c.le("Delta# xi_n = i k xi_n, n <= 40", worst, 1e-13)


def test_criterion_3_field_equations():
    with Criterion("3 field-equation residuals", 30.0) as c:
        box = lc.LatticeBox.cube(16)
        ts = (-0.7, 0.0, 1.3)
        for k in RNG.uniform(-1.5, 1.5, (2, 3)):
            c.le("Klein-Gordon", wm.kg_residual(k, 1.0, box, ts), 1e-10)
            c.le("Maxwell", wm.maxwell_residual(k, box, ts), 1e-10)
            res = wm.dirac_residual(k, 1.0, box, ts)
            c.le("Dirac", max(res["u"], res["v"]), 1e-10)
            c.le("Dirac adjoint", max(res["u_adjoint"], res["v_adjoint"]), 1e-10)
        box4 = lc.LatticeBox.cube(10, 4)
        fld = wm.covariant_mode(box4, np.array([0.4, -0.6, 0.3]), 1.0)
        c.le("covariant Klein-Gordon", np.max(np.abs(lc.dalembertian_discrete(fld, 1.0).interior())), 1e-10)


def test_criterion_4_greens_functions():
    with Criterion("4 Green's functions", 60.0) as c:
        mu, q = 1.0, 40
        split = conj = anti = swap = kg = 0.0
        for _ in range(8):
            n, nh = tuple(RNG.integers(0, 5, 3)), tuple(RNG.integers(0, 5, 3))
            p = greens.EventPair(tuple(map(int, n)), tuple(map(int, nh)), *map(float, RNG.uniform(-1.5, 1.5, 2)))
            dp, dm = greens.delta_plus(p, mu, q), greens.delta_minus(p, mu, q)
            split = max(split, abs(greens.delta_homogeneous(p, mu, q) - dp - dm))
            conj = max(conj, abs(np.conj(dp) - dm))
            anti = max(anti, abs(greens.delta_homogeneous(p, mu, q) + greens.delta_homogeneous(p.swapped(), mu, q)))
            swap = max(swap, abs(greens.delta_feynman(p, mu, q) - greens.delta_feynman(p.swapped(), mu, q)))
            kg = max(kg, greens.kg_annihilation_residual(p, mu, q))
            s = greens.s_function(p, mu, "full", q)
            c.le("S = S+ + S-", np.max(np.abs(s - greens.s_function(p, mu, "plus", q)
                                              - greens.s_function(p, mu, "minus", q))), 1e-8)
            c.le("Dirac annihilation", greens.dirac_annihilation_residual(p, mu, "full", q), 1e-8)
        c.le("split", split, 1e-12)
        c.le("conjugation", conj, 1e-12)
        c.le("antisymmetry", anti, 1e-12)
        c.le("Feynman swap", swap, 1e-12)
        c.le("Klein-Gordon annihilation", kg, 1e-8)
        for n, nh in [((1, 2, 0), (2, 0, 1)), ((0, 0, 3), (3, 0, 0))]:
            c.le("equal-time off-diagonal",
                 abs(greens.delta_homogeneous(greens.EventPair(n, nh, 0.3, 0.3), mu, q, dt=1)), 1e-8)
        for n in [(0, 0, 0), (1, 2, 0), (4, 1, 3)]:
            c.le("equal-time diagonal",
                 abs(greens.delta_homogeneous(greens.EventPair(n, n, 0.3, 0.3), mu, q, dt=1) + 1), 1e-6)


def test_criterion_5_algebra_suites():
    with Criterion("5 algebra suites", 20.0) as c:
        three = fock.ModeSet.product_grid((3, 1, 1))
        reps = [fock.build_boson_rep(three, 3, charged=False, exact=True),
                fock.build_boson_rep(three, 3, charged=True, exact=True),
                fock.build_photon_rep(three.subset([0]), 3, exact=True),
                fock.build_fermion_rep(three, spins=2, exact=True)]
        for rep in reps:
            recs = fock.ladder_commutator_suite(rep) + fock.statistics_suite(rep)
            c.le(f"{rep.kind} sub-cutoff defect", max(r.max_defect for r in recs), 0.0)
            if rep.kind == "fermion":
                c.le("fermion full defect", max(r.full_defect for r in recs), 0.0)


@pytest.mark.parametrize("shape", [(3, 3, 3), (5, 5, 5)])
def test_criterion_6_oracle_equivalence(shape):
    with Criterion(f"6 conserved quantities vs mode sums, {shape[0]}^3 modes", 300.0) as c:
        basis = ob.ModeBasis.packets(shape, 32)
        R = basis.size
        for sp in ob.SPECIES:
            mass = 1.0
            errs = []
            for n in (8, 12, 16):
                recs = ob.oracle_equivalence(sp, basis, n, mass)
                errs.append(max(max(r["rel_err"], r["zero_point_rel_err"]) for r in recs))
            c.le(f"{sp} rel err at N_box 12", errs[1], 0.02)
            c.le(f"{sp} strictly decreasing", float(not errs[0] > errs[1] > errs[2]), 0.0)
            if sp == "photon":
                continue
            _, lat, _ = ob.lattice_and_mode_sets(sp, basis, 12, mass)
            q = ob.single_particle_charges(lat)
            e = 1.0 if sp == "scalar" else ob.ELECTRON_CHARGE
            npart = R if sp == "scalar" else 2 * R
            c.le(f"{sp} particle charge", np.max(np.abs(q[:npart] - e)) / abs(e), 0.02)
            c.le(f"{sp} antiparticle charge", np.max(np.abs(q[npart:] + e)) / abs(e), 0.02)
            if sp == "scalar":
                c.gt("boson vacuum energy", lat.zero_point, 0.0)
            else:
                c.gt("fermion vacuum energy (negated)", -lat.zero_point, 0.0)


def _generator_setup():
    pb = ob.ModeBasis.point((3, 1, 1))
    fl = ob.assemble_scalar_field(pb, (3, 1, 1), 1.0)
    rep = fock.build_boson_rep(pb.mode_set(1.0), 2)
    return pb, fl, rep


def test_criterion_7_generators_and_polarization():
    with Criterion("7 generators and conservation") as c:
        pb, fl, rep = _generator_setup()
        for label, cs in (("mode-sum", ob.mode_sum_scalar(pb, 1.0)), ("lattice", ob.conserved_scalar(fl))):
            for site in [(0, 0, 0), (1, 0, 0), (2, 0, 0)]:
                for r in ob.generator_check(rep, fl, cs, site):
                    if "+ i d#" not in r["name"]:
                        c.le(f"{label} {r['name']}", r["measured"], r["tolerance"])
        for k in [(0.3, 0.4, 1.2), (-0.9, 0.2, 0.1), (0.0, 0.0, 0.8)]:
            pol = ob.polarization_report(np.array(k), seed=5)
            c.le("non-transverse energy on physical states", pol["nontransverse_energy_on_physical_states"], 1e-10)


@pytest.mark.xfail(strict=True, reason="the opposite sign of the momentum relation contradicts the field expansion")
def test_criterion_7_opposite_momentum_sign():
    with Criterion("7 generators, opposite sign [P_j, phi] = -i Delta#_j phi") as c:
        pb, fl, rep = _generator_setup()
        for r in ob.generator_check(rep, fl, ob.mode_sum_scalar(pb, 1.0), (1, 0, 0)):
            if "+ i d#1" in r["name"]:
                c.le(r["name"], r["measured"], 1e-10)


def test_criterion_8_stress_conservation():
    with Criterion("8 c-number stress conservation") as c:
        box = lc.LatticeBox.cube(12)
        smodes = [(tuple(RNG.uniform(-1, 1, 3)), complex(*RNG.normal(size=2)), complex(*RNG.normal(size=2)))
                  for _ in range(3)]
        dmodes = [(tuple(RNG.uniform(-1, 1, 3)), "uv"[i % 2], i % 2, complex(*RNG.normal(size=2)))
                  for i in range(3)]
        for t in RNG.uniform(-2, 2, 5):
            for sp, modes in (("scalar", smodes), ("dirac", dmodes)):
                c.le(f"{sp} residual", max(ob.stress_conservation_cnumber(sp, modes, box, t, 1.0).values()), 1e-8)
                c.gt(f"{sp} detuned control",
                     max(ob.stress_conservation_cnumber(sp, modes, box, t, 1.0, detune=0.5).values()), 1e-3)


def test_criterion_9_equal_time_structure():
    with Criterion("9 equal-time structure") as c:
        frob = {"scalar": [], "dirac": []}
        for M in (3, 4, 5):
            b = ob.ModeBasis.point(M)
            s = ob.equal_time_scalar(b, 5, 1.0)["dt_phi_dag"]
            d = ob.equal_time_dirac(b, 5, 1.0)
            frob["scalar"].append(np.linalg.norm(s + 1j * np.eye(len(s))))
            frob["dirac"].append(np.linalg.norm(d - np.eye(len(d))))
        for sp, mat, target in (("scalar", s, -1j), ("dirac", d, 1.0)):
            err = ob.delta_pattern_error(mat, target)
            c.le(f"{sp} off-diagonal at 5^3", err["off_diagonal"], 0.05)
            c.le(f"{sp} diagonal at 5^3", err["diagonal"], 0.05)
            f = frob[sp]
            c.le(f"{sp} improves with mode count", float(not f[0] > f[1] > f[2]), 0.0)
