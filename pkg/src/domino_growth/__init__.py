"""Domino shuffling with periodic weights: exact sampling, weight dynamics,
Kasteleyn thermodynamics and growth speed of the Aztec diamond.

Submodules: ``lattice``, ``weights``, ``rng``, ``shuffle``, ``laurent``,
``kasteleyn``, ``thermo``, ``growth``, ``io``, ``render``, ``cli``.
"""

__version__ = "0.1.0"
