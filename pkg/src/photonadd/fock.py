"""Truncated Fock-space substrate.

Two-mode pure states are stored as amplitude matrices ``c[m, n] = <m, n|psi>``
so that a single-mode operator acts on mode 1 by left multiplication and on
mode 2 by right multiplication with its transpose. Density operators are
dense matrices on the flattened joint space (row-major, mode 1 outer).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CutoffMismatch, TruncationOverflow, ZeroNorm

HERMITIAN_TOL = 1e-10
PSD_SLACK = -1e-9
ZERO_NORM_SQ = 1e-24

MIN_AUTO_CUTOFF = 8
MAX_AUTO_CUTOFF = 256


@dataclass(frozen=True)
class CutoffConfig:
    """Per-mode photon-number truncation and numerical tolerances.

    Attributes:
        n_max: Highest retained photon number in each mode.
        norm_tol: Allowed deviation of a state's norm (or a density trace) from 1.
        tail_tol: Largest probability allowed on the top Fock level.
    """

    n_max: int
    norm_tol: float = 1e-10
    tail_tol: float = 1e-8

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")
        for name in ("norm_tol", "tail_tol"):
            tol = getattr(self, name)
            if not 0.0 < tol < 1e-3:
                raise ValueError(f"{name} must lie in (0, 1e-3), got {tol!r}")

    @property
    def dim(self) -> int:
        return self.n_max + 1


def auto_cutoff(lam: float, tail_tol: float = 1e-8, headroom: int = 0) -> int:
    """Smallest ``n_max`` that resolves a TMSV of parameter ``lam``.

    Picks the smallest n with ``(1 - lam**2) * lam**(2n) * (n + 1) < (tail_tol / 10)**2``,
    clamped to ``[8, 256]``, then adds ``headroom`` levels (still capped at
    256). The squared threshold bounds the neglected amplitude, not just
    probability, by ``tail_tol / 10``; that keeps Schmidt-sum negativities
    converged to ~1e-9. Each photon addition or subtraction stretches the
    amplitude envelope, so multi-step pipelines want a few levels of headroom.
    """
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"lambda must lie in [0, 1), got {lam!r}")
    threshold = (tail_tol / 10.0) ** 2
    n = 0
    while n < MAX_AUTO_CUTOFF:
        if (1.0 - lam**2) * lam ** (2 * n) * (n + 1) < threshold:
            break
        n += 1
    n = min(max(n, MIN_AUTO_CUTOFF), MAX_AUTO_CUTOFF)
    return int(min(n + headroom, MAX_AUTO_CUTOFF))


@dataclass(frozen=True)
class ModeOperator:
    """Truncated matrix of a single-mode operator."""

    matrix: np.ndarray
    kind: str = "custom"
    cutoff: CutoffConfig | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("ModeOperator matrix must be square")
        if self.cutoff is not None and m.shape[0] != self.cutoff.dim:
            raise CutoffMismatch("operator dimension does not match its cutoff")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "ModeOperator":
        kind = {"creation": "annihilation", "annihilation": "creation"}.get(self.kind, self.kind)
        return ModeOperator(self.matrix.conj().T, kind, self.cutoff)

    def __matmul__(self, other: "ModeOperator") -> "ModeOperator":
        return ModeOperator(self.matrix @ other.matrix, "custom", self.cutoff)


def _ladder(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), -1).astype(complex)


def creation_matrix(cutoff: CutoffConfig) -> ModeOperator:
    """Truncated a^dagger; the top level is mapped to the zero vector."""
    return ModeOperator(_ladder(cutoff.dim), "creation", cutoff)


def annihilation_matrix(cutoff: CutoffConfig) -> ModeOperator:
    return ModeOperator(_ladder(cutoff.dim).T.copy(), "annihilation", cutoff)


def identity_matrix(cutoff: CutoffConfig) -> ModeOperator:
    return ModeOperator(np.eye(cutoff.dim, dtype=complex), "identity", cutoff)


def number_matrix(cutoff: CutoffConfig) -> ModeOperator:
    return ModeOperator(np.diag(np.arange(cutoff.dim, dtype=float)).astype(complex), "custom", cutoff)


def eigvalsh(matrix: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix; real input takes the faster real solver."""
    if np.iscomplexobj(matrix) and not np.any(matrix.imag):
        matrix = matrix.real
    return np.linalg.eigvalsh(matrix)


def _fix_global_phase(amps: np.ndarray) -> np.ndarray:
    flat = amps.ravel()
    if flat.size == 0:
        return amps
    k = int(np.argmax(np.abs(flat)))
    if flat[k] == 0:
        return amps
    return amps * (abs(flat[k]) / flat[k])


@dataclass(frozen=True)
class PureTwoModeState:
    """Normalized two-mode pure state in the truncated Fock basis.

    ``amplitudes[m, n]`` is the coefficient of ``|m, n>``. Instances are
    immutable; the amplitude array is made read-only on construction.
    """

    amplitudes: np.ndarray
    cutoff: CutoffConfig

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.cutoff.dim, self.cutoff.dim):
            raise CutoffMismatch(
                f"amplitude shape {amps.shape} does not match cutoff n_max={self.cutoff.n_max}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > self.cutoff.norm_tol:
            raise ValueError(f"state is not normalized (squared norm {norm_sq!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def fock(cls, m: int, n: int, cutoff: CutoffConfig) -> "PureTwoModeState":
        """The product number state ``|m, n>``."""
        if not (0 <= m <= cutoff.n_max and 0 <= n <= cutoff.n_max):
            raise ValueError(f"|{m},{n}> is outside the truncated space")
        amps = np.zeros((cutoff.dim, cutoff.dim), dtype=complex)
        amps[m, n] = 1.0
        return cls(amps, cutoff)

    @property
    def vector(self) -> np.ndarray:
        """Amplitudes flattened onto the joint basis (mode 1 outer)."""
        return self.amplitudes.ravel()

    def photon_numbers(self) -> tuple[float, float]:
        """Mean photon number of each mode."""
        p = np.abs(self.amplitudes) ** 2
        n = np.arange(self.cutoff.dim)
        return float(p.sum(axis=1) @ n), float(p.sum(axis=0) @ n)


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, positive, unit-trace matrix on one or two truncated modes."""

    matrix: np.ndarray
    mode_count: int
    cutoff: CutoffConfig

    def __post_init__(self):
        if self.mode_count not in (1, 2):
            raise ValueError("mode_count must be 1 or 2")
        rho = np.array(self.matrix, dtype=complex)
        d = self.cutoff.dim**self.mode_count
        if rho.shape != (d, d):
            raise CutoffMismatch(f"density shape {rho.shape} does not match ({d}, {d})")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
            raise ValueError("density operator is not Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > self.cutoff.norm_tol:
            raise ValueError(f"density operator trace is {tr!r}, expected 1")
        rho = 0.5 * (rho + rho.conj().T)
        lo = float(eigvalsh(rho)[0])
        if lo < PSD_SLACK:
            raise ValueError(f"density operator has eigenvalue {lo!r} < {PSD_SLACK}")
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    @property
    def tensor(self) -> np.ndarray:
        """Matrix reshaped to one bra and one ket axis per mode."""
        d = self.cutoff.dim
        return self.matrix.reshape((d,) * (2 * self.mode_count))

    def populations(self) -> np.ndarray:
        """Diagonal of the matrix; shape ``(d,)`` or ``(d, d)`` for two modes."""
        d = self.cutoff.dim
        diag = np.real(np.diag(self.matrix))
        return diag.reshape((d,) * self.mode_count)


def _check_same_cutoff(a: CutoffConfig, b: CutoffConfig):
    if a.n_max != b.n_max:
        raise CutoffMismatch(f"cutoffs differ: n_max={a.n_max} vs n_max={b.n_max}")


def apply_mode(op: ModeOperator, which: int, state: PureTwoModeState) -> tuple[np.ndarray, float]:
    """Apply ``op`` to one mode of ``state`` without renormalizing.

    Returns:
        The new amplitude matrix and its squared norm.
    """
    if op.dim != state.cutoff.dim or (op.cutoff is not None and op.cutoff.n_max != state.cutoff.n_max):
        raise CutoffMismatch("operator and state use different cutoffs")
    if which not in (1, 2):
        raise ValueError(f"mode index must be 1 or 2, got {which!r}")
    if op.kind == "identity":
        out = state.amplitudes.copy()
    elif which == 1:
        out = op.matrix @ state.amplitudes
    else:
        out = state.amplitudes @ op.matrix.T
    return out, float(np.sum(np.abs(out) ** 2))


def normalize(amplitudes: np.ndarray, cutoff: CutoffConfig) -> tuple[PureTwoModeState, float]:
    """Scale ``amplitudes`` to unit norm and fix the global phase.

    The largest-magnitude amplitude is made real and positive.

    Returns:
        The normalized state and the norm that was divided out.

    Raises:
        ZeroNorm: if the squared norm is below 1e-24.
    """
    amps = np.asarray(amplitudes, dtype=complex)
    norm_sq = float(np.sum(np.abs(amps) ** 2))
    if norm_sq < ZERO_NORM_SQ:
        raise ZeroNorm(f"squared norm {norm_sq:.3e} is numerically zero")
    norm = float(np.sqrt(norm_sq))
    return PureTwoModeState(_fix_global_phase(amps / norm), cutoff), norm


def tail_mass(state: PureTwoModeState | DensityOperator) -> float:
    """Probability on the top retained level of any mode.

    For two modes this is the mass of row ``n_max`` plus column ``n_max``
    with the shared corner counted once.
    """
    if isinstance(state, PureTwoModeState):
        pops = np.abs(state.amplitudes) ** 2
    else:
        pops = state.populations()
    if pops.ndim == 1:
        return float(pops[-1])
    return float(pops[-1, :].sum() + pops[:, -1].sum() - pops[-1, -1])


def check_tail(state: PureTwoModeState | DensityOperator, what: str = "state"):
    """Raise TruncationOverflow if ``state`` leaks past its cutoff's ``tail_tol``."""
    t = tail_mass(state)
    if t > state.cutoff.tail_tol:
        raise TruncationOverflow(
            f"{what}: tail mass {t:.3e} exceeds tail_tol {state.cutoff.tail_tol:.1e} "
            f"at n_max={state.cutoff.n_max}"
        )


def fidelity(psi: PureTwoModeState, phi: PureTwoModeState) -> float:
    """Squared overlap ``|<psi|phi>|**2`` of two pure states."""
    _check_same_cutoff(psi.cutoff, phi.cutoff)
    ov = np.vdot(psi.amplitudes, phi.amplitudes)
    return float(min(1.0, abs(ov) ** 2))


def state_fidelity(a: PureTwoModeState | DensityOperator, b: PureTwoModeState | DensityOperator) -> float:
    """Uhlmann fidelity; reduces to ``<psi|rho|psi>`` when one argument is pure."""
    _check_same_cutoff(a.cutoff, b.cutoff)
    if isinstance(a, PureTwoModeState) and isinstance(b, PureTwoModeState):
        return fidelity(a, b)
    if isinstance(a, PureTwoModeState):
        a, b = b, a
    if isinstance(b, PureTwoModeState):
        v = b.vector
        return float(min(1.0, np.real(np.vdot(v, a.matrix @ v))))
    w, u = np.linalg.eigh(a.matrix)
    w[w < 1e-12] = 0.0  # rounding noise would otherwise enter through sqrt
    sqrt_a = (u * np.sqrt(w)) @ u.conj().T
    inner = np.linalg.eigvalsh(sqrt_a @ b.matrix @ sqrt_a)
    inner[inner < 1e-12] = 0.0
    return float(min(1.0, np.sum(np.sqrt(inner)) ** 2))


def pure_to_density(state: PureTwoModeState) -> DensityOperator:
    v = state.vector
    return DensityOperator(np.outer(v, v.conj()), 2, state.cutoff)


def reduced_density(state: PureTwoModeState | DensityOperator, keep: int) -> DensityOperator:
    """Partial trace over the mode that is not ``keep``."""
    if keep not in (1, 2):
        raise ValueError(f"mode index must be 1 or 2, got {keep!r}")
    if isinstance(state, PureTwoModeState):
        c = state.amplitudes
        rho = c @ c.conj().T if keep == 1 else c.T @ c.conj()
    else:
        if state.mode_count != 2:
            raise ValueError("reduced_density needs a two-mode density operator")
        t = state.tensor  # axes (m, n, m', n')
        rho = np.einsum("ajbj->ab", t) if keep == 1 else np.einsum("jajb->ab", t)
    return DensityOperator(rho, 1, state.cutoff)
