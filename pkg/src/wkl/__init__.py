"""Whittaker dimensions of constituents of covering principal series."""

from .rootdata import RootDatum, WeylGroup, build_root_datum
from .covering import CoveringDatum, ModuliSpace, Orbit, build_covering
from .kltheory import ClassFunction, KLData, character_table, inner_product, kl_data
from .whittaker import (CharValue, Constituent, GenuineCharacter, coarse_dim, constituents,
                        exceptional_character, phi_chi, sigma_x, whittaker_dim)
from .scattering import (ExactBackend, GaussMonomial, NumericBackend, Transversal, canonicalize,
                         d_function, operator_rank, scattering_matrix, steinberg_basis)

__all__ = [
    "RootDatum", "WeylGroup", "build_root_datum",
    "CoveringDatum", "ModuliSpace", "Orbit", "build_covering",
    "ClassFunction", "KLData", "character_table", "inner_product", "kl_data",
    "CharValue", "Constituent", "GenuineCharacter", "coarse_dim", "constituents",
    "exceptional_character", "phi_chi", "sigma_x", "whittaker_dim",
    "ExactBackend", "GaussMonomial", "NumericBackend", "Transversal", "canonicalize",
    "d_function", "operator_rank", "scattering_matrix", "steinberg_basis",
]
