"""WRT invariants and homological blocks of plumbed homology spheres."""

__version__ = "0.1.0"
