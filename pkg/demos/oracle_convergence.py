"""Lattice sums of P, H, Q against their mode-sum forms as the site box grows.

Run: python3 demos/oracle_convergence.py
"""
from dps_qft import observables as ob

basis = ob.ModeBasis.packets((3, 3, 3), fine_order=32)

print(f"{'species':8} {'N_box':>5} {'quantity':>8} {'rel_err':>10} {'zero-point':>10}")
for species in ob.SPECIES:
    for n_box in (8, 12, 16):
        for r in ob.oracle_equivalence(species, basis, n_box):
            print(f"{species:8} {n_box:5d} {r['quantity']:>8} {r['rel_err']:10.2e} {r['zero_point_rel_err']:10.2e}")

# one-particle charges read off the ordered lattice charge
for species in ("scalar", "dirac"):
    _, lat, mode = ob.lattice_and_mode_sets(species, basis, 12)
    q = ob.single_particle_charges(lat)
    half = len(q) // 2
    print(f"{species}: particle charge {q[:half].mean():+.5f}, antiparticle {q[half:].mean():+.5f}, "
          f"vacuum energy {lat.zero_point:+.3f} (mode sum {mode.zero_point:+.3f})")
