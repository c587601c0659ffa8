"""Entanglement measures: Schmidt spectrum, partial transpose, negativity, entropy.

Pure states go through the Schmidt decomposition (an SVD of the amplitude
matrix, O(d^3)); mixed states through eigenvalues of the partial transpose
on the full joint space (O(d^6)). Logarithms are base 2.
"""

from __future__ import annotations

import math

import numpy as np

from .fock import DensityOperator, PureTwoModeState, eigvalsh

SCHMIDT_FLOOR = 1e-14
EIG_NEG_CLIP = -1e-12


def schmidt_coefficients(state: PureTwoModeState) -> np.ndarray:
    """Schmidt coefficients in descending order, values below 1e-14 set to 0."""
    s = np.linalg.svd(state.amplitudes, compute_uv=False)
    s = np.sort(s)[::-1]
    s[s < SCHMIDT_FLOOR] = 0.0
    return s


def negativity_pure(state: PureTwoModeState) -> float:
    """((sum of Schmidt coefficients)^2 - 1) / 2."""
    s = schmidt_coefficients(state)
    return max(0.0, float((s.sum() ** 2 - 1.0) / 2.0))


def partial_transpose(rho: DensityOperator) -> np.ndarray:
    """Transpose the mode-2 indices: <m,n|rho^T2|m',n'> = <m,n'|rho|m',n>."""
    if rho.mode_count != 2:
        raise ValueError("partial transpose needs a two-mode density operator")
    d = rho.cutoff.dim
    t = rho.tensor.transpose(0, 3, 2, 1)
    return t.reshape(d * d, d * d)


def negativity_density(rho: DensityOperator) -> float:
    """Sum of the magnitudes of the negative partial-transpose eigenvalues."""
    w = eigvalsh(partial_transpose(rho))
    neg = w[w < EIG_NEG_CLIP]
    return float(-neg.sum())


def negativity(state: PureTwoModeState | DensityOperator) -> float:
    """Dispatch to the Schmidt route for pure states and the eigenvalue route otherwise."""
    if isinstance(state, PureTwoModeState):
        return negativity_pure(state)
    return negativity_density(state)


def log_negativity(neg: float) -> float:
    if neg < 0:
        raise ValueError(f"negativity must be >= 0, got {neg!r}")
    return math.log2(2.0 * neg + 1.0)


def entanglement_entropy(state: PureTwoModeState) -> float:
    """Von Neumann entropy (bits) of either reduced state."""
    p = schmidt_coefficients(state) ** 2
    p = p[p > 0]
    return max(0.0, float(-(p * np.log2(p)).sum()))
