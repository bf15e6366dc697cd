"""The Hermite-function lattice in a few numbers.

xi_n(k) are eigenvectors of the weighted mean difference with eigenvalue ik,
so plane waves on the lattice are columns of xi values and the wave
equations hold site by site.
"""
import numpy as np

from dps_qft import greens, hermite_basis as hb, lattice_calculus as lc, wave_modes as wm

k = 0.8
col = hb.xi_column(30, k)
out = lc.delta_sharp(lc.LatticeField.from_values(col), 0)
print("max |Delta# xi - i k xi| over n < 30:", np.max(np.abs(out.interior() - 1j * k * col[:30])))

rule = hb.gauss_hermite(60)
gram = hb.overlap_gram(20, rule)
print("orthonormality defect n <= 20:", np.max(np.abs(gram - np.eye(21))))

box = lc.LatticeBox.cube(12)
kv = np.array([0.4, -0.7, 0.2])
print("Klein-Gordon residual:", wm.kg_residual(kv, 1.0, box, (0.0, 1.0)))
print("Klein-Gordon residual, detuned:", wm.kg_residual(kv, 1.0, box, (0.0,), freq=float(wm.omega(kv, 1.0)) + 0.1))

p = greens.EventPair((1, 0, 2), (1, 2, 0), 0.4, -0.3)
print("Delta+ =", greens.delta_plus(p, 1.0, 40))
print("Delta  =", greens.delta_homogeneous(p, 1.0, 40))
same = greens.EventPair((1, 2, 0), (1, 2, 0), 0.0, 0.0)
print("equal-time d_t Delta on the diagonal:", greens.delta_homogeneous(same, 1.0, 40, dt=1))
