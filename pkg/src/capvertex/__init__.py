"""Exact computations with descendent vertex functions of instanton moduli spaces.

Modules: ``exactalg`` (exact arithmetic), ``combinat`` (partitions and
degree data), ``locvertex`` (bare vertex by localization), ``fock``
(Macdonald polynomials and the Fock representation), ``toroidal``
(quantum toroidal gl(1) generators, R-matrices, E(z), B(z)), ``qde``
(capping operator and verification suites) and ``cli``.
"""

__version__ = "0.1.0"
