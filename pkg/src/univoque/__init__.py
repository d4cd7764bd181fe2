"""Univoque bases, relative entropy plateaus and local dimensions of the
set of univoque bases over the alphabet {0, ..., M}."""

from .dimension import DimValue, Side, bifurcation_dims, dim_W, dj_function, interval_dim, local_dim
from .entropy import EntropyValue, build_sft, count_blocks_matrix, entropy_H, entropy_HJ, spectral_radius
from .expansion import BaseEnclosure, RationalInterval, base_from_alpha, komornik_loreti, quasi_greedy_alpha
from .plateaux import PlateauTree, build_tree, classify, smallest_plateau_containing
from .words import Alphabet, Word, periodic

__all__ = [
    "Alphabet", "BaseEnclosure", "DimValue", "EntropyValue", "PlateauTree", "RationalInterval", "Side", "Word",
    "base_from_alpha", "bifurcation_dims", "build_sft", "build_tree", "classify", "count_blocks_matrix",
    "dim_W", "dj_function", "entropy_H", "entropy_HJ", "interval_dim", "komornik_loreti", "local_dim",
    "periodic", "quasi_greedy_alpha", "smallest_plateau_containing", "spectral_radius",
]
