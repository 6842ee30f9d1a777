"""Qubit thermometry of a micromechanical resonator.

A probe qubit interacts with a thermal phonon mode through the
Jaynes-Cummings coupling; the package computes the resulting qubit state,
the classical and quantum Fisher information for the inverse temperature,
optimal interaction times, and Monte Carlo maximum-likelihood estimates.
"""
__version__ = "0.1.0"

from .probe import (BlochVector, DomainError, ModelParams, ProbeState, TruncationPolicy,
                    bloch, choose_truncation, d_thermal_weight, probe_state,
                    probe_state_decohered, probe_state_unitary, probe_states_over_tau,
                    rabi_half_freq, thermal_weight)
from .metrics import (FisherReport, NumericalInconsistencyError, PreconditionError,
                      SldOperator, fisher_population, fisher_report, qfi_bloch, qfi_eigen,
                      rho_plus_closed_form, sld)
