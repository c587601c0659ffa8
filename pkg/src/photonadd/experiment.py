"""Heralded coherent photon addition with realistic imperfections.

An SPDC source seeded by the two signal modes emits a photon into the
polarization mode ``A^dag = cos(phi) a1^dag + sin(phi) a2^dag`` together
with an idler photon. A non-number-resolving detector with efficiency
``eta`` watches the idler; a click heralds the photon-added signal state.
The SPDC evolution is expanded to second order in the gain, so the idler
holds at most two photons and double-pair emission shows up as
contamination of the heralded state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import TruncationOverflow, ZeroClickProbability
from .fock import (
    CutoffConfig,
    DensityOperator,
    PureTwoModeState,
    check_tail,
    normalize,
)

MAX_GAIN = 0.5
IDLER_DIM = 3
MIN_CLICK_PROBABILITY = 1e-18
COMPONENT_FLOOR = 1e-14

# mu_from_angle result at phi = pi/2, where tan(phi) diverges
MODE2_ONLY = "mode-2 only"


@dataclass(frozen=True)
class HeraldConfig:
    """Knobs of the heralded-addition setup.

    Attributes:
        gain: SPDC interaction strength g (perturbative, at most 0.5).
        herald_efficiency: Idler detection efficiency eta.
        pump_angle: Twin-photon polarization angle phi in radians.
        signal_loss: Transmission of each signal mode after the addition.
    """

    gain: float = 0.1
    herald_efficiency: float = 1.0
    pump_angle: float = math.pi / 4
    signal_loss: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if not 0.0 <= self.gain <= MAX_GAIN:
            raise ValueError(f"gain must lie in [0, {MAX_GAIN}], got {self.gain!r}")
        if not 0.0 <= self.herald_efficiency <= 1.0:
            raise ValueError(f"herald_efficiency must lie in [0, 1], got {self.herald_efficiency!r}")
        if not math.isfinite(self.pump_angle):
            raise ValueError("pump_angle must be finite")
        loss = tuple(float(t) for t in self.signal_loss)
        if len(loss) != 2 or not all(0.0 <= t <= 1.0 for t in loss):
            raise ValueError(f"signal_loss must be two transmissions in [0, 1], got {self.signal_loss!r}")
        object.__setattr__(self, "signal_loss", loss)


@dataclass(frozen=True)
class HeraldedOutcome:
    state: DensityOperator
    click_probability: float

    def __post_init__(self):
        if not 0.0 <= self.click_probability <= 1.0:
            raise ValueError(f"click probability {self.click_probability!r} outside [0, 1]")


def mu_from_angle(phi: float) -> complex | str:
    """Coherent-addition weight ``mu = tan(phi)`` for polarization angle ``phi``.

    Returns :data:`MODE2_ONLY` when ``cos(phi)`` vanishes.
    """
    if abs(math.cos(phi)) < 1e-12:
        return MODE2_ONLY
    return complex(math.tan(phi))


def loss_kraus(eta: float, dim: int) -> list[np.ndarray]:
    """Beam-splitter (amplitude damping) Kraus operators with transmission ``eta``.

    ``K_k |n> = sqrt(C(n, k)) eta^((n-k)/2) (1-eta)^(k/2) |n-k>``.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmission must lie in [0, 1], got {eta!r}")
    ops = []
    for k in range(dim):
        K = np.zeros((dim, dim))
        for n in range(k, dim):
            K[n - k, n] = math.sqrt(math.comb(n, k)) * eta ** ((n - k) / 2) * (1 - eta) ** (k / 2)
        ops.append(K)
    return ops


def _apply_channel(tensor: np.ndarray, kraus: list[np.ndarray], axis: int, n_modes: int) -> np.ndarray:
    # tensor has ket axes 0..n_modes-1 followed by matching bra axes
    out = np.zeros_like(tensor)
    for K in kraus:
        t = np.moveaxis(np.tensordot(K, tensor, axes=(1, axis)), 0, axis)
        t = np.moveaxis(np.tensordot(t, K.conj(), axes=(axis + n_modes, 1)), -1, axis + n_modes)
        out += t
    return out


def loss_channel(rho: DensityOperator, mode: int, eta: float) -> DensityOperator:
    """Send one mode of ``rho`` through a beam splitter of transmission ``eta``."""
    if mode not in range(1, rho.mode_count + 1):
        raise ValueError(f"mode {mode!r} not present in a {rho.mode_count}-mode state")
    if eta == 1.0:
        return rho
    out = _apply_channel(rho.tensor, loss_kraus(eta, rho.cutoff.dim), mode - 1, rho.mode_count)
    d = rho.cutoff.dim**rho.mode_count
    return DensityOperator(out.reshape(d, d), rho.mode_count, rho.cutoff)


def click_effect(eta: float) -> np.ndarray:
    """Idler POVM element for a click, ``sum_k K_k^dag (I - |0><0|) K_k``.

    This is the click projector seen through the idler loss channel, so
    the idler loss and the detection are folded into one operator.
    """
    proj = np.eye(IDLER_DIM)
    proj[0, 0] = 0.0
    return sum(K.conj().T @ proj @ K for K in loss_kraus(eta, IDLER_DIM))


def _idler_ladder() -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, IDLER_DIM, dtype=float)), -1)


def _spdc_generator(psi: np.ndarray, phi: float) -> np.ndarray:
    """X = A^dag b^dag - A b on a joint ket of shape (d, d, 3)."""
    d = psi.shape[0]
    up = np.diag(np.sqrt(np.arange(1, d, dtype=float)), -1)
    b_up = _idler_ladder()
    c, s = math.cos(phi), math.sin(phi)

    def along_a(op, t):
        return c * np.einsum("ij,jkl->ikl", op, t) + s * np.einsum("kj,ijl->ikl", op, t)

    raised = np.einsum("lj,ikj->ikl", b_up, along_a(up, psi))
    lowered = np.einsum("lj,ikj->ikl", b_up.T, along_a(up.T, psi))
    return raised - lowered


def _headroom_ok(pops: np.ndarray, tol: float) -> bool:
    # populations of either mode at n >= n_max - 1
    edge = pops[-2:, :].sum() + pops[:, -2:].sum() - pops[-2:, -2:].sum()
    return edge <= tol


def _components(source: PureTwoModeState | DensityOperator) -> list[tuple[float, np.ndarray]]:
    if isinstance(source, PureTwoModeState):
        return [(1.0, source.amplitudes)]
    if source.mode_count != 2:
        raise ValueError("heralded addition needs a two-mode input")
    w, u = np.linalg.eigh(source.matrix)
    d = source.cutoff.dim
    return [(float(w[j]), u[:, j].reshape(d, d)) for j in range(len(w)) if w[j] > COMPONENT_FLOOR]


def heralded_addition(source: PureTwoModeState | DensityOperator, cfg: HeraldConfig) -> HeraldedOutcome:
    """Signal state conditioned on a herald click.

    Steps: attach an idler in vacuum; apply ``1 + gX + (g^2/2) X^2`` with
    ``X = A^dag b^dag - A b``; detect the idler through loss ``eta`` with a
    click/no-click detector; trace out the idler; apply signal losses;
    renormalize. The click probability is the trace before renormalizing.

    Raises:
        TruncationOverflow: if the input lacks two photons of headroom or the
            output leaks past the cutoff.
        ZeroClickProbability: if the click probability is below 1e-18.
    """
    cutoff = source.cutoff
    pops = np.abs(source.amplitudes) ** 2 if isinstance(source, PureTwoModeState) else source.populations()
    if not _headroom_ok(pops, cutoff.tail_tol):
        raise TruncationOverflow(
            f"input needs two photons of headroom below n_max={cutoff.n_max}"
        )
    g = cfg.gain
    effect = click_effect(cfg.herald_efficiency)
    d = cutoff.dim
    rho = np.zeros((d * d, d * d), dtype=complex)
    for weight, amps in _components(source):
        psi = np.zeros((d, d, IDLER_DIM), dtype=complex)
        psi[:, :, 0] = amps
        x1 = _spdc_generator(psi, cfg.pump_angle)
        x2 = _spdc_generator(x1, cfg.pump_angle)
        out = (psi + g * x1 + 0.5 * g**2 * x2).reshape(d * d, IDLER_DIM)
        rho += weight * (out @ effect.T @ out.conj().T)
    prob = float(np.trace(rho).real)
    if prob < MIN_CLICK_PROBABILITY:
        raise ZeroClickProbability(
            f"click probability {prob:.3e} (eta={cfg.herald_efficiency}, g={g})"
        )
    rho = rho / prob
    state = DensityOperator(0.5 * (rho + rho.conj().T), 2, cutoff)
    for mode, t in enumerate(cfg.signal_loss, start=1):
        state = loss_channel(state, mode, t)
    check_tail(state, "heralded_addition")
    return HeraldedOutcome(state, min(prob, 1.0))


def ideal_addition(state: PureTwoModeState, phi: float) -> PureTwoModeState:
    """Normalized ``(cos(phi) a1^dag + sin(phi) a2^dag)|state>``; the noiseless target."""
    d = state.cutoff.dim
    up = np.diag(np.sqrt(np.arange(1, d, dtype=float)), -1)
    c = state.amplitudes
    out, _ = normalize(math.cos(phi) * (up @ c) + math.sin(phi) * (c @ up.T), state.cutoff)
    return out
