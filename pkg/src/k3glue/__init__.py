"""Exact lattice computations for Kummer-type and Nikulin-type lattices of K3 surfaces."""

from .lattice import Lattice, LatticeError, direct_sum, discriminant_group, length
from .overlattice import GlueVector, Overlattice, build_overlattice, validate_glue
from .roots import AdeType, ade_gram, ade_sum, enumerate_roots, is_isometric, root_decomposition

__version__ = "0.1.0"

__all__ = [
    "AdeType",
    "GlueVector",
    "Lattice",
    "LatticeError",
    "Overlattice",
    "ade_gram",
    "ade_sum",
    "build_overlattice",
    "direct_sum",
    "discriminant_group",
    "enumerate_roots",
    "is_isometric",
    "length",
    "root_decomposition",
    "validate_glue",
]
