"""Coherent photon addition and subtraction on two-mode squeezed vacuum in a truncated Fock space."""
