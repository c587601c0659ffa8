"""Two-mode squeezed vacuum and its coherently photon-added/subtracted descendants."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import TruncationOverflow, ZeroNorm
from .fock import (
    CutoffConfig,
    PureTwoModeState,
    annihilation_matrix,
    apply_mode,
    check_tail,
    creation_matrix,
    normalize,
)

DB_PER_NEPER = 20.0 / math.log(10.0)
MAX_MU = 1e6


@dataclass(frozen=True)
class SqueezingParams:
    """Squeezing strength in its three usual parameterizations.

    ``lam = tanh(r)`` and ``db = -10*log10(exp(-2r))``. Build with one of the
    ``from_*`` constructors rather than filling all three fields by hand.
    """

    r: float
    lam: float
    db: float

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r >= 0):
            raise ValueError(f"squeezing r must be finite and >= 0, got {self.r!r}")
        if not 0.0 <= self.lam < 1.0:
            raise ValueError(f"lambda must lie in [0, 1), got {self.lam!r}")
        if abs(self.lam - math.tanh(self.r)) > 1e-12 or abs(self.db - DB_PER_NEPER * self.r) > 1e-12:
            raise ValueError("inconsistent squeezing parameters")

    @classmethod
    def from_r(cls, r: float) -> "SqueezingParams":
        return cls(r, math.tanh(r), DB_PER_NEPER * r)

    @classmethod
    def from_lambda(cls, lam: float) -> "SqueezingParams":
        if not 0.0 <= lam < 1.0:
            raise ValueError(f"lambda must lie in [0, 1), got {lam!r}")
        r = math.atanh(lam)
        return cls(r, lam, DB_PER_NEPER * r)

    @classmethod
    def from_db(cls, db: float) -> "SqueezingParams":
        if not (math.isfinite(db) and db >= 0):
            raise ValueError(f"dB must be finite and >= 0, got {db!r}")
        r = db / DB_PER_NEPER
        return cls(r, math.tanh(r), db)


def check_mu(mu: complex) -> complex:
    mu = complex(mu)
    if not cmath.isfinite(mu):
        raise ValueError(f"mu must be finite, got {mu!r}")
    if abs(mu) > MAX_MU:
        raise ValueError(f"|mu| must not exceed {MAX_MU:g}, got {abs(mu)!r}")
    return mu


@dataclass(frozen=True)
class Step:
    """One pipeline stage: ``kind`` is ``"add"`` or ``"subtract"``."""

    kind: str
    mu: complex = 1.0

    def __post_init__(self):
        if self.kind not in ("add", "subtract"):
            raise ValueError(f"step kind must be 'add' or 'subtract', got {self.kind!r}")
        object.__setattr__(self, "mu", check_mu(self.mu))


@dataclass(frozen=True)
class OpPipeline:
    steps: tuple[Step, ...]

    def __post_init__(self):
        steps = tuple(self.steps)
        if not steps:
            raise ValueError("a pipeline needs at least one step")
        object.__setattr__(self, "steps", steps)

    @classmethod
    def of(cls, *steps: tuple[str, complex] | str) -> "OpPipeline":
        """``OpPipeline.of("add", ("subtract", 0.5j))``"""
        out = []
        for s in steps:
            out.append(Step(s) if isinstance(s, str) else Step(*s))
        return cls(tuple(out))


def _as_lambda(params: SqueezingParams | float) -> float:
    if isinstance(params, SqueezingParams):
        return params.lam
    return SqueezingParams.from_lambda(float(params)).lam


def tmsv(params: SqueezingParams | float, cutoff: CutoffConfig) -> PureTwoModeState:
    """Two-mode squeezed vacuum ``sqrt(1-lam^2) sum lam^n |n, n>``.

    Renormalized over the truncated block.

    Raises:
        TruncationOverflow: if the top level carries more than ``tail_tol``.
    """
    lam = _as_lambda(params)
    n = np.arange(cutoff.dim)
    diag = math.sqrt(1.0 - lam**2) * lam**n
    amps = np.diag(diag).astype(complex)
    state, _ = normalize(amps, cutoff)
    check_tail(state, f"tmsv(lambda={lam})")
    return state


def _two_mode_ladder(state: PureTwoModeState, mu: complex, raising: bool) -> np.ndarray:
    op = creation_matrix(state.cutoff) if raising else annihilation_matrix(state.cutoff)
    first, _ = apply_mode(op, 1, state)
    second, _ = apply_mode(op, 2, state)
    return first + mu * second


def coherent_add(state: PureTwoModeState, mu: complex = 1.0) -> tuple[PureTwoModeState, float]:
    """Apply ``a1^dag + mu a2^dag`` and renormalize.

    Returns:
        The photon-added state and the squared norm before normalization,
        which is proportional to the heralding rate in the ideal scheme.
    """
    mu = check_mu(mu)
    out, norm = normalize(_two_mode_ladder(state, mu, raising=True), state.cutoff)
    check_tail(out, "coherent_add")
    return out, norm**2


def coherent_subtract(state: PureTwoModeState, mu: complex = 1.0) -> tuple[PureTwoModeState, float]:
    """Apply ``a1 + mu a2`` and renormalize.

    Raises:
        ZeroNorm: if the operator annihilates the state, e.g. on vacuum.
    """
    mu = check_mu(mu)
    out, norm = normalize(_two_mode_ladder(state, mu, raising=False), state.cutoff)
    check_tail(out, "coherent_subtract")
    return out, norm**2


def _delocalized_photon_reference(lam: float, cutoff: CutoffConfig) -> PureTwoModeState:
    # (1-lam^2)/sqrt(2) * lam^n sqrt(n+1) on |n+1, n> and |n, n+1>
    lam = _as_lambda(lam)
    amps = np.zeros((cutoff.dim, cutoff.dim), dtype=complex)
    pref = (1.0 - lam**2) / math.sqrt(2.0)
    for n in range(cutoff.n_max):
        c = pref * lam**n * math.sqrt(n + 1)
        amps[n + 1, n] = c
        amps[n, n + 1] = c
    state, _ = normalize(amps, cutoff)
    check_tail(state, f"reference(lambda={lam})")
    return state


def cpa_reference(lam: float, cutoff: CutoffConfig) -> PureTwoModeState:
    """Closed form of the coherently photon-added TMSV at ``mu = 1``."""
    return _delocalized_photon_reference(lam, cutoff)


def cps_reference(lam: float, cutoff: CutoffConfig) -> PureTwoModeState:
    """Closed form of the coherently photon-subtracted TMSV at ``mu = 1``.

    Built from the subtraction expansion, summing from n = 1 and
    re-indexing; the amplitudes coincide with :func:`cpa_reference`.
    """
    lam = _as_lambda(lam)
    amps = np.zeros((cutoff.dim, cutoff.dim), dtype=complex)
    pref = (1.0 - lam**2) / math.sqrt(2.0)
    for n in range(1, cutoff.n_max + 1):
        c = pref * lam ** (n - 1) * math.sqrt(n)
        amps[n - 1, n] = c
        amps[n, n - 1] = c
    state, _ = normalize(amps, cutoff)
    check_tail(state, f"reference(lambda={lam})")
    return state


def mode_swap(state: PureTwoModeState) -> PureTwoModeState:
    """Exchange the two modes (transpose of the amplitude matrix)."""
    return PureTwoModeState(state.amplitudes.T, state.cutoff)


def run_pipeline(state: PureTwoModeState, pipeline: OpPipeline | Sequence[Step]) -> tuple[PureTwoModeState, float]:
    """Apply the pipeline steps in order, renormalizing after each one.

    Returns:
        The final state and the product of the per-step weights.

    Raises:
        ZeroNorm, TruncationOverflow: with ``exc.step`` set to the failing index.
    """
    if not isinstance(pipeline, OpPipeline):
        pipeline = OpPipeline(tuple(pipeline))
    weight = 1.0
    for i, step in enumerate(pipeline.steps):
        op = coherent_add if step.kind == "add" else coherent_subtract
        try:
            state, w = op(state, step.mu)
        except (ZeroNorm, TruncationOverflow) as exc:
            exc.step = i
            raise
        weight *= w
    return state, weight
