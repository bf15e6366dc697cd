"""Verification suites shared by the command line and the demos.

Each suite returns check records {name, tag, measured, tolerance, pass} and a
list of informational measurements that never affect the outcome.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import fock, greens, hermite_basis as hb, lattice_calculus as lc, observables as ob, wave_modes as wm

SUITES = ("basis", "lattice", "modes", "greens", "algebra", "observables", "conservation")


@dataclass
class RunConfig:
    suite: str = "all"
    mu: float = 1.0
    m: float = 1.0
    quad_order: int = 40
    grid: list = field(default_factory=lambda: [3, 3, 3])
    fine_order: int = 32
    cutoff: int = 2
    n_box: int = 12
    box: int = 16
    sweep: list = field(default_factory=lambda: [8, 12, 16])
    fock_grid: list = field(default_factory=lambda: [3, 1, 1])
    tolerances: dict = field(default_factory=dict)
    seed: int = 0

    def validate(self):
        if self.suite not in SUITES + ("all",):
            raise ValueError(f"unknown suite {self.suite!r}")
        if self.mu < 0 or self.m <= 0:
            raise ValueError("mu must be >= 0 and m > 0")
        if any(not (isinstance(v, (int, float)) and v > 0) for v in self.tolerances.values()):
            raise ValueError("tolerances must be positive numbers")
        if len(self.grid) != 3 or any(int(g) < 1 for g in self.grid):
            raise ValueError("grid must be three positive integers")
        if len(self.fock_grid) != 3 or any(int(g) < 1 for g in self.fock_grid):
            raise ValueError("fock_grid must be three positive integers")
        if self.quad_order < 2 or self.fine_order < 2:
            raise ValueError("quadrature orders must be >= 2")
        if self.mu == 0 and self.quad_order % 2 and self.suite in ("greens", "all"):
            raise ValueError("massless Green's functions need an even quadrature order")
        if self.suite in ("observables", "all"):
            if self.mu <= 0:
                raise ValueError("the observables suite needs a massive scalar (mu > 0)")
            ms = fock.ModeSet.product_grid(tuple(self.grid))
            if not ms.is_symmetric():
                raise ValueError("the observables suite needs a grid symmetric under k -> -k")
            if max(self.grid) > self.fine_order // 2:
                raise ValueError("grid must not exceed half of fine_order")
        if self.cutoff < 1 or self.n_box < 1 or self.box < 4:
            raise ValueError("cutoff >= 1, n_box >= 1 and box >= 4 required")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        return self

    def to_dict(self) -> dict:
        return asdict(self)


class Collector:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.records: list = []
        self.measurements: list = []
        self.tables: dict = {}
        self.quantities: list = []

    def check(self, name, tag, measured, tolerance, mode="le"):
        tol = float(self.cfg.tolerances.get(name, tolerance))
        measured = float(measured)
        ok = measured <= tol if mode == "le" else measured > tol
        self.records.append({"name": name, "tag": tag, "measured": measured, "tolerance": tol, "pass": bool(ok)})

    def measure(self, name, value):
        self.measurements.append({"name": name, "value": value})


def _rng(cfg: RunConfig, salt: int):
    return np.random.default_rng([cfg.seed, salt])


def suite_basis(c: Collector):
    rule = hb.gauss_hermite(80)
    gram = hb.overlap_gram(20, rule)
    c.check("orthonormality n<=20", "orthonormality", np.max(np.abs(gram - np.eye(21))), 1e-13)
    k = np.linspace(-4, 4, 41)
    col, colm = hb.xi_column(30, k), hb.xi_column(30, -k)
    sign = (-1.0) ** np.arange(31)[:, None]
    c.check("parity and conjugation", "parity", max(np.max(np.abs(colm - np.conj(col))),
                                                    np.max(np.abs(colm - sign * col))), 1e-14)
    rng = _rng(c.cfg, 1)
    worst = 0.0
    for _ in range(20):
        a, b = rng.uniform(-3, 3, 2)
        for N in (5, 17, 30):
            worst = max(worst, abs(hb.christoffel_darboux(N, a, b) - hb.christoffel_darboux_closed(N, a, b)))
    c.check("Christoffel-Darboux N<=30", "christoffel-darboux", worst, 1e-12)
    worst = 0.0
    for n in range(11):
        for a, b in rng.uniform(-2, 2, (5, 2)):
            lhs, rhs = hb.addition_theorem_sides(n, a, b)
            worst = max(worst, abs(lhs - rhs))
    c.check("addition theorem n<=10", "addition-theorem", worst, 1e-11)
    worst = max(hb.fourier_self_map_check(n, kk, 120) for n in range(21) for kk in (-2.5, -0.7, 0.0, 1.3, 3.1))
    c.check("Fourier self-map n<=20", "fourier-self-map", worst, 1e-8)
    gf = max(abs(hb.generating_function_partial(t, kk, 80) - hb.generating_function_closed(t, kk))
             for t in (-0.8, 0.3, 1.0) for kk in (-1.5, 0.0, 2.0))
    c.check("generating function", "generating-function", gf, 1e-12)
    alt = abs(hb.generating_function_partial(0.5, 1.0, 80) - hb.generating_function_closed(0.5, 1.0, unnormalized=True))
    c.measure("generating function, alternative closed form |difference| at t=0.5, k=1", alt)


def suite_lattice(c: Collector):
    rng = _rng(c.cfg, 2)
    ks = rng.uniform(-4, 4, 50)
    worst = 0.0
    for k in ks:
        fld = lc.LatticeField.from_values(hb.xi_column(41, k))
        out = lc.delta_sharp(fld, 0)
        worst = max(worst, float(np.max(np.abs(out.interior()[:41] - 1j * k * fld.values[:41]))))
    c.check("eigenrelation n<=40", "eigenrelation", worst, 1e-13)
    f = rng.normal(size=(9, 9, 9)) + 1j * rng.normal(size=(9, 9, 9))
    g = rng.normal(size=(9, 9, 9)) + 1j * rng.normal(size=(9, 9, 9))
    ff, gg = lc.LatticeField.from_values(f), lc.LatticeField.from_values(g)
    worst = 0.0
    for a in range(3):
        lhs = ob._mul(ff, lc.delta_sharp(gg, a)) + ob._mul(lc.delta_sharp(ff, a), gg)
        rhs = lc.delta_right(ob._X(ff, gg, a), a)
        v = (lhs - rhs).interior()
        worst = max(worst, float(np.max(np.abs(v))))
    c.check("lattice Leibniz rule", "leibniz", worst, 1e-12)


def suite_modes(c: Collector):
    cfg = c.cfg
    rng = _rng(cfg, 3)
    box = lc.LatticeBox.cube(cfg.box)
    ts = tuple(rng.uniform(-2, 2, 3))
    k = rng.uniform(-1.5, 1.5, 3)
    c.check("Klein-Gordon residual", "klein-gordon", wm.kg_residual(k, cfg.mu, box, ts), 1e-10)
    c.check("Maxwell residual", "maxwell", wm.maxwell_residual(k, box, ts), 1e-10)
    res = wm.dirac_residual(k, cfg.m, box, ts)
    c.check("Dirac residual", "dirac", max(res.values()), 1e-10)
    c.check("Klein-Gordon detuned residual", "klein-gordon-detuned",
            wm.kg_residual(k, cfg.mu, box, ts, freq=float(wm.omega(k, cfg.mu)) + 0.1), 1e-3, mode="gt")
    box4 = lc.LatticeBox.cube(10, 4)
    fld = wm.covariant_mode(box4, k, cfg.mu)
    v = lc.dalembertian_discrete(fld, cfg.mu ** 2).interior()
    c.check("covariant Klein-Gordon residual", "klein-gordon-4d", float(np.max(np.abs(v))), 1e-10)
    c.check("Clifford algebra", "clifford", wm.clifford_defect(wm.gamma_default()), 1e-14)
    e = wm.tetrad_build(k)
    c.check("tetrad orthonormality", "tetrad", float(np.max(np.abs(e @ lc.METRIC @ e.T - lc.METRIC))), 1e-12)


def _pairs(rng, count):
    out = []
    for _ in range(count):
        n = tuple(int(x) for x in rng.integers(0, 5, 3))
        nh = tuple(int(x) for x in rng.integers(0, 5, 3))
        t, th = rng.uniform(-1.5, 1.5, 2)
        out.append(greens.EventPair(n, nh, float(t), float(th)))
    return out


def suite_greens(c: Collector):
    cfg = c.cfg
    mu, q = cfg.mu, cfg.quad_order
    rng = _rng(cfg, 4)
    pairs = _pairs(rng, 6)
    split = conj = anti = swap = kg = 0.0
    rows = []
    for p in pairs:
        dp, dm = greens.delta_plus(p, mu, q), greens.delta_minus(p, mu, q)
        d = greens.delta_homogeneous(p, mu, q)
        split = max(split, abs(d - dp - dm))
        conj = max(conj, abs(np.conj(dp) - dm))
        anti = max(anti, abs(d + greens.delta_homogeneous(p.swapped(), mu, q)))
        swap = max(swap, abs(greens.delta_feynman(p, mu, q) - greens.delta_feynman(p.swapped(), mu, q)))
        kg = max(kg, greens.kg_annihilation_residual(p, mu, q))
        rows.append([*p.n, *p.nh, p.t, p.th, dp.real, dp.imag, dm.real, dm.imag, d.real, d.imag])
    c.check("Delta = Delta+ + Delta-", "greens-split", split, 1e-12)
    c.check("conj(Delta+) = Delta-", "greens-conjugation", conj, 1e-12)
    c.check("Delta antisymmetry", "greens-antisymmetry", anti, 1e-12)
    c.check("Feynman swap symmetry", "greens-feynman", swap, 1e-12)
    c.check("Klein-Gordon annihilation", "greens-annihilation", kg, 1e-8)
    diag = greens.delta_homogeneous(greens.EventPair((1, 2, 0), (1, 2, 0), 0.3, 0.3), mu, q, dt=1)
    off = greens.delta_homogeneous(greens.EventPair((1, 2, 0), (2, 0, 1), 0.3, 0.3), mu, q, dt=1)
    c.check("equal-time d_t Delta diagonal", "greens-equal-time", abs(diag + 1), 1e-6)
    c.check("equal-time d_t Delta off-diagonal", "greens-equal-time", abs(off), 1e-8)
    if cfg.m > 0:
        p = pairs[0]
        s_split = np.max(np.abs(greens.s_function(p, cfg.m, "full", q) - greens.s_function(p, cfg.m, "plus", q)
                                - greens.s_function(p, cfg.m, "minus", q)))
        c.check("S = S+ + S-", "greens-spinor-split", s_split, 1e-8)
        c.check("Dirac annihilation", "greens-spinor-annihilation",
                greens.dirac_annihilation_residual(p, cfg.m, "full", q), 1e-8)
    c.tables["greens_samples"] = (["n1", "n2", "n3", "nh1", "nh2", "nh3", "t", "th", "dplus_re", "dplus_im",
                                   "dminus_re", "dminus_im", "delta_re", "delta_im"], rows)


def suite_algebra(c: Collector):
    cfg = c.cfg
    ms = fock.ModeSet.product_grid(tuple(cfg.fock_grid))
    reps = [fock.build_boson_rep(ms, cfg.cutoff, charged=False, exact=True),
            fock.build_photon_rep(fock.ModeSet(ms.momenta[:1], ms.weights[:1]), cfg.cutoff, exact=True),
            fock.build_fermion_rep(ms, spins=2 if len(ms) <= 3 else 1, exact=True)]
    if (cfg.cutoff + 1) ** (2 * len(ms)) <= fock.DEFAULT_BUDGET:
        reps.insert(1, fock.build_boson_rep(ms, cfg.cutoff, charged=True, exact=True))
    for rep in reps:
        label = rep.kind + (" (charged)" if rep.kind == "boson" and len(rep.registers) > len(ms) else "")
        recs = fock.ladder_commutator_suite(rep) + fock.statistics_suite(rep)
        worst = max(recs, key=lambda r: r.max_defect)
        c.check(f"{label} ladder identities (exact, sub-cutoff)", "ladder-algebra", worst.max_defect, 0.0)
        c.measure(f"{label} full-space defect", max(r.full_defect for r in recs))
    frep = fock.build_boson_rep(ms, cfg.cutoff, charged=False)
    c.check("delta consistency", "delta-consistency", fock.delta_consistency(frep), 1e-12)


def suite_observables(c: Collector):
    cfg = c.cfg
    basis = ob.ModeBasis.packets(tuple(cfg.grid), cfg.fine_order)
    rows = []
    for sp in ob.SPECIES:
        mass = cfg.m if sp == "dirac" else cfg.mu
        errs = []
        for n in cfg.sweep:
            recs = ob.oracle_equivalence(sp, basis, n, mass)
            worst = max(max(r["rel_err"], r["zero_point_rel_err"]) for r in recs)
            errs.append(worst)
            for r in recs:
                rows.append([sp, basis.size, n, r["quantity"], r["rel_err"], r["zero_point_rel_err"]])
            if n == cfg.n_box:
                c.quantities.extend({**r, "cutoff": None} for r in recs)
                c.check(f"{sp} lattice sums vs mode sums", "oracle-equivalence", worst, 0.02)
        c.check(f"{sp} convergence is monotone", "oracle-convergence",
                float(any(b >= a for a, b in zip(errs, errs[1:]))), 0.0)
        if sp != "photon":
            _, lat, mode = ob.lattice_and_mode_sets(sp, basis, cfg.n_box, mass)
            q = ob.single_particle_charges(lat)
            R = basis.size
            e = 1.0 if sp == "scalar" else ob.ELECTRON_CHARGE
            particle = q[:R] if sp == "scalar" else q[:2 * R]
            anti = q[R:] if sp == "scalar" else q[2 * R:]
            c.check(f"{sp} particle charge", "charge-quantization",
                    max(np.max(np.abs(particle - e)), np.max(np.abs(anti + e))) / abs(e), 0.02)
            zp = lat.zero_point
            c.check(f"{sp} vacuum energy sign", "zero-point-sign", float(zp <= 0 if sp == "scalar" else zp >= 0), 0.0)
            c.measure(f"{sp} vacuum energy (lattice, mode sum)", [zp, mode.zero_point])
            c.measure(f"{sp} raw charge constant", float(np.real(lat.Q.normal_ordered(lat.alg).const)))
    c.tables["convergence"] = (["species", "modes", "N_box", "quantity", "rel_err", "zero_point_rel_err"], rows)

    point = ob.ModeBasis.point(tuple(cfg.grid))
    for sp in ("scalar", "dirac"):
        mass = cfg.m if sp == "dirac" else cfg.mu
        _, lat, _ = ob.lattice_and_mode_sets(sp, point, tuple(cfg.grid), mass)
        q = ob.single_particle_charges(lat)
        e = 1.0 if sp == "scalar" else ob.ELECTRON_CHARGE
        half = len(q) // 2
        c.check(f"{sp} point-mode charge quantization", "charge-quantization",
                max(np.max(np.abs(q[:half] - e)), np.max(np.abs(q[half:] + e))), 1e-12)

    pb = ob.ModeBasis.point(tuple(cfg.fock_grid))
    fl = ob.assemble_scalar_field(pb, tuple(cfg.fock_grid), cfg.mu)
    rep = fock.build_boson_rep(pb.mode_set(cfg.mu), cfg.cutoff)
    site = tuple(min(1, g - 1) for g in cfg.fock_grid)
    for label, cs in (("mode-sum", ob.mode_sum_scalar(pb, cfg.mu)), ("lattice", ob.conserved_scalar(fl))):
        for r in ob.generator_check(rep, fl, cs, site):
            if "+ i d#" in r["name"]:
                c.measure(f"{label} {r['name']}", r["measured"])
            else:
                c.check(f"{label} {r['name']}", "generators", r["measured"], r["tolerance"])
        c.check(f"{label} hermiticity", "hermiticity", ob.hermiticity_defect(rep, cs), 1e-12)
    pol = ob.polarization_report(np.array([0.3, 0.4, 1.2]), cutoff=cfg.cutoff, seed=cfg.seed % (2 ** 32))
    c.check("photon non-transverse energy on physical states", "polarization",
            pol["nontransverse_energy_on_physical_states"], 1e-10)
    c.check("photon one-particle energy, transverse form", "polarization",
            abs(pol["one_photon_energy_transverse_form"] - pol["one_photon_expected"]), 1e-10)
    c.measure("photon vacuum energy split", {k: pol[k] for k in pol if k.startswith("vacuum")})


def suite_conservation(c: Collector):
    cfg = c.cfg
    rng = _rng(cfg, 7)
    box = lc.LatticeBox.cube(12)
    smodes = [(tuple(rng.uniform(-1, 1, 3)), complex(*rng.normal(size=2)), complex(*rng.normal(size=2)))
              for _ in range(3)]
    dmodes = [(tuple(rng.uniform(-1, 1, 3)), "uv"[i % 2], i % 2, complex(*rng.normal(size=2))) for i in range(3)]
    times = rng.uniform(-2, 2, 5)
    worst = {"scalar": 0.0, "dirac": 0.0}
    literal = {"scalar": 0.0, "dirac": 0.0}
    control = {"scalar": np.inf, "dirac": np.inf}
    for t in times:
        for sp, modes, mass in (("scalar", smodes, cfg.mu), ("dirac", dmodes, cfg.m)):
            worst[sp] = max(worst[sp], *ob.stress_conservation_cnumber(sp, modes, box, t, mass).values())
            literal[sp] = max(literal[sp], *ob.stress_conservation_cnumber(sp, modes, box, t, mass,
                                                                            variant="literal").values())
            control[sp] = min(control[sp], max(ob.stress_conservation_cnumber(sp, modes, box, t, mass,
                                                                              detune=0.5).values()))
    for sp in ("scalar", "dirac"):
        c.check(f"{sp} stress conservation", "stress-conservation", worst[sp], 1e-8)
        c.check(f"{sp} detuned control", "stress-control", control[sp], 1e-3, mode="gt")
        c.measure(f"{sp} stress residual, unsymmetrized arrangement", literal[sp])
    for M in (3, 4, 5):
        b = ob.ModeBasis.point(M)
        et = ob.equal_time_scalar(b, 5, cfg.mu)["dt_phi_dag"]
        err = ob.delta_pattern_error(et, -1j)
        c.measure(f"scalar equal-time pattern, {M}^3 modes", err)
    b = ob.ModeBasis.point(5)
    s = ob.delta_pattern_error(ob.equal_time_scalar(b, 5, cfg.mu)["dt_phi_dag"], -1j)
    d = ob.delta_pattern_error(ob.equal_time_dirac(b, 5, cfg.m), 1.0)
    c.check("scalar equal-time off-diagonal", "equal-time", s["off_diagonal"], 0.05)
    c.check("scalar equal-time diagonal", "equal-time", s["diagonal"], 0.05)
    c.check("Dirac equal-time off-diagonal", "equal-time", d["off_diagonal"], 0.05)
    c.check("Dirac equal-time diagonal", "equal-time", d["diagonal"], 0.05)


RUNNERS = {
    "basis": suite_basis, "lattice": suite_lattice, "modes": suite_modes, "greens": suite_greens,
    "algebra": suite_algebra, "observables": suite_observables, "conservation": suite_conservation,
}


def run(cfg: RunConfig) -> Collector:
    cfg.validate()
    c = Collector(cfg)
    for name in (SUITES if cfg.suite == "all" else (cfg.suite,)):
        RUNNERS[name](c)
    return c


def dispersion_rows(momenta, mu: float, m: float) -> list:
    """(k1, k2, k3, omega, nu, E) per momentum."""
    rows = []
    for k in np.atleast_2d(momenta):
        rows.append([float(k[0]), float(k[1]), float(k[2]), float(wm.omega(k, mu)), float(wm.omega(k, 0.0)),
                     float(wm.omega(k, m))])
    return rows


def emit_dispersion_table(cfg: RunConfig) -> tuple:
    ms = fock.ModeSet.product_grid(tuple(cfg.grid))
    return ["k1", "k2", "k3", "omega", "nu", "E"], dispersion_rows(ms.momenta, cfg.mu, cfg.m)


def _json_safe(x):
    if isinstance(x, dict):
        return {str(k): _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x
