"""Open-system analysis of the adiabatic unstructured-search crossing.

Library layout:

- model: two-level reduction of the search Hamiltonian (bias, tunneling, gap)
- bath: spectral densities, discretization, dressed-mode parameters
- renorm: tunneling renormalization, one- and two-boson fixed points
- critical: coherent/incoherent phase boundaries and scaling-exponent fits
- rates: golden-rule and polaron-correlator thermalization rates
- dynamics: schedules, sweep dynamics with and without dephasing
- bogoliubov: para-unitary diagonalization of quadratic boson Hamiltonians
- cli: batch runner (`openaqs <subcommand> --config ...`)
"""

from .model import SearchInstance, two_level_params, gap, min_gap, projected_pauli

__all__ = [
    "SearchInstance",
    "two_level_params",
    "gap",
    "min_gap",
    "projected_pauli",
]

__version__ = "0.1.0"
