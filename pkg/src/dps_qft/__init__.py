"""Free scalar, Dirac and photon fields on the lattice of Hermite-function indices."""

__version__ = "0.1.0"
