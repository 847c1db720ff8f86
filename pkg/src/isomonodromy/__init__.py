"""Numerical laboratory for monodromy-preserving deformations of Fuchsian
systems on the punctured sphere.

Submodules
----------
algebra      dense sl(N, C) matrices, coadjoint orbits, Lie-Poisson bracket
connection   Fuchsian connections L(z), spectral curves, moduli dimensions
monodromy    analytic continuation along contours, monodromy invariants
isoflow      the Schlesinger hierarchy: flows, Hamiltonians, audits
hitchin      the autonomous Gaudin limit and its conservation laws
jets         truncated bivariate power series (scalar and matrix valued)
wstructures  projective and higher W-structure flatness identities on jets
serialize    JSON wire formats for matrices, connections and reports
cli          batch driver (`isomono`) for config-driven experiments
"""

from . import algebra, connection, hitchin, isoflow, jets, monodromy, serialize, wstructures

__all__ = [
    "algebra",
    "connection",
    "monodromy",
    "isoflow",
    "hitchin",
    "jets",
    "wstructures",
    "serialize",
]

__version__ = "0.1.0"
