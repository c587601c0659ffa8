"""Wigner functions, quadrature distributions and homodyne sampling.

Quadratures follow ``x = (a + a^dag)/sqrt(2)``, ``p = (a - a^dag)/(i sqrt(2))``
with ``[x, p] = i``; the vacuum has variance 1/2 and ``W(0, 0) = 1/pi``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import InvalidCount
from .fock import DensityOperator, PureTwoModeState, pure_to_density

SAMPLE_RANGE = (-8.0, 8.0)
SAMPLE_POINTS = 4096


@dataclass(frozen=True)
class PhasePoint:
    x: float
    p: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.p)):
            raise ValueError("phase-space coordinates must be finite")


@dataclass(frozen=True)
class WignerGrid:
    """Wigner values on a rectangular mesh; ``values[i, j]`` sits at ``(xs[i], ps[j])``."""

    x_min: float
    x_max: float
    p_min: float
    p_max: float
    values: np.ndarray

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.p_min < self.p_max):
            raise ValueError("grid bounds must be strictly ordered")
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or min(v.shape) < 2:
            raise ValueError("grid needs at least 2 points along each axis")
        if not np.all(np.isfinite(v)):
            raise ValueError("Wigner values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.values.shape[0])

    @property
    def ps(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.values.shape[1])

    def integral(self) -> float:
        """Trapezoidal integral of W over the mesh."""
        return float(np.trapezoid(np.trapezoid(self.values, self.ps, axis=1), self.xs))

    def to_csv(self) -> str:
        """``x,p,w`` rows, x outer and p inner, 17 significant digits."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "p", "w"])
        for i, x in enumerate(self.xs):
            for j, p in enumerate(self.ps):
                w.writerow([f"{x:.17g}", f"{p:.17g}", f"{self.values[i, j]:.17g}"])
        return buf.getvalue()


def _laguerre_diagonals(x: np.ndarray, p: np.ndarray, dim: int) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(k, ell)`` with ``ell[m] = sqrt(m!/(m+k)!) L_m^k(B) B^(k/2) e^(-B/2)``.

    ``B = 2 (x^2 + p^2)``. The normalized recurrence keeps every term O(1)
    so no factorial ever overflows, even for ``dim`` in the hundreds.
    """
    B = 2.0 * (x**2 + p**2)
    with np.errstate(divide="ignore"):
        logB = np.log(B)
    for k in range(dim):
        count = dim - k
        ell = np.empty((count,) + B.shape)
        if k == 0:
            ell[0] = np.exp(-B / 2.0)
        else:
            ell[0] = np.where(B > 0, np.exp(0.5 * k * logB - 0.5 * B - 0.5 * math.lgamma(k + 1)), 0.0)
        if count > 1:
            ell[1] = (1.0 + k - B) / math.sqrt(k + 1.0) * ell[0]
        for m in range(1, count - 1):
            a = (2 * m + 1 + k - B) / math.sqrt((m + 1.0) * (m + k + 1.0))
            b = math.sqrt(m * (m + k) / ((m + 1.0) * (m + k + 1.0)))
            ell[m + 1] = a * ell[m] - b * ell[m - 1]
        yield k, ell


def _wigner_complex(rho: np.ndarray, x: np.ndarray, p: np.ndarray) -> np.ndarray:
    dim = rho.shape[0]
    phase = np.exp(1j * np.arctan2(p, x))
    total = np.zeros(np.broadcast(x, p).shape, dtype=complex)
    for k, ell in _laguerre_diagonals(x, p, dim):
        sign = (-1.0) ** np.arange(dim - k)
        upper = np.diagonal(rho, offset=k)  # rho[m, m+k]
        if k == 0:
            total += np.tensordot(sign * upper, ell, axes=1)
        else:
            lower = np.diagonal(rho, offset=-k)  # rho[m+k, m]
            total += phase**k * np.tensordot(sign * upper, ell, axes=1)
            total += phase ** (-k) * np.tensordot(sign * lower, ell, axes=1)
    return total / math.pi


def wigner_kernel(pt: PhasePoint, dim: int) -> np.ndarray:
    """Matrix K with ``W(pt) = Tr[rho K]``; ``K = D Pi D^dag / pi`` on the truncated block."""
    x, p = np.asarray(pt.x, dtype=float), np.asarray(pt.p, dtype=float)
    phase = complex(np.exp(1j * np.arctan2(p, x)))
    K = np.zeros((dim, dim), dtype=complex)
    for k, ell in _laguerre_diagonals(x, p, dim):
        vals = (-1.0) ** np.arange(dim - k) * ell * phase**k / math.pi
        idx = np.arange(dim - k)
        K[idx + k, idx] = vals
        K[idx, idx + k] = np.conj(vals)
    return K


def _single_mode(rho: DensityOperator) -> np.ndarray:
    if rho.mode_count != 1:
        raise ValueError("expected a single-mode density operator; use reduced_density first")
    return rho.matrix


def wigner_point(rho: DensityOperator, pt: PhasePoint) -> float:
    """Wigner function of a single-mode state at one phase-space point."""
    w = _wigner_complex(_single_mode(rho), np.asarray(pt.x, float), np.asarray(pt.p, float))
    return float(np.real(w))


def wigner_values(rho: DensityOperator, x, p) -> np.ndarray:
    """Vectorized Wigner evaluation; ``x`` and ``p`` broadcast against each other."""
    x, p = np.broadcast_arrays(np.asarray(x, float), np.asarray(p, float))
    return np.real(_wigner_complex(_single_mode(rho), x, p))


def wigner_grid(
    rho: DensityOperator,
    x_min: float = -6.0,
    x_max: float = 6.0,
    p_min: float = -6.0,
    p_max: float = 6.0,
    nx: int = 201,
    np_: int = 201,
) -> WignerGrid:
    if nx < 2 or np_ < 2:
        raise ValueError("grid needs at least 2 points along each axis")
    xs = np.linspace(x_min, x_max, nx)
    ps = np.linspace(p_min, p_max, np_)
    X, P = np.meshgrid(xs, ps, indexing="ij")
    return WignerGrid(x_min, x_max, p_min, p_max, wigner_values(rho, X, P))


def wigner_two_mode_point(
    state: PureTwoModeState | DensityOperator, pt1: PhasePoint, pt2: PhasePoint
) -> float:
    """Two-mode Wigner function ``Tr[rho (K1 x K2)]`` at the point (pt1, pt2).

    Uses the same ``1/pi`` per-mode normalization as :func:`wigner_point`,
    so ``|0,0>`` at the origin gives ``1/pi^2``.
    """
    if isinstance(state, PureTwoModeState):
        state = pure_to_density(state)
    if state.mode_count != 2:
        raise ValueError("expected a two-mode state")
    d = state.cutoff.dim
    K1 = wigner_kernel(pt1, d)
    K2 = wigner_kernel(pt2, d)
    # Tr[rho (K1 x K2)] = sum rho[(a,b),(c,e)] K1[c,a] K2[e,b]
    w = np.einsum("abce,ca,eb->", state.tensor, K1, K2)
    return float(np.real(w))


def _oscillator_functions(x: np.ndarray, dim: int) -> np.ndarray:
    """Harmonic-oscillator eigenfunctions psi_n(x), n < dim, via the stable three-term recurrence."""
    psi = np.empty((dim,) + x.shape)
    psi[0] = math.pi**-0.25 * np.exp(-(x**2) / 2.0)
    if dim > 1:
        psi[1] = math.sqrt(2.0) * x * psi[0]
    for n in range(1, dim - 1):
        psi[n + 1] = math.sqrt(2.0 / (n + 1)) * x * psi[n] - math.sqrt(n / (n + 1.0)) * psi[n - 1]
    return psi


def quadrature_pdf(rho: DensityOperator, theta: float, x) -> np.ndarray | float:
    """Probability density of the rotated quadrature ``x_theta`` at ``x``.

    ``x_theta = (a e^{-i theta} + a^dag e^{i theta}) / sqrt(2)``; theta = 0 is
    the x quadrature and theta = pi/2 the p quadrature. Accepts scalar or
    array ``x``; tiny negative values from rounding are clamped to 0.
    """
    m = _single_mode(rho)
    xa = np.asarray(x, dtype=float)
    psi = _oscillator_functions(xa, m.shape[0])
    u = psi * np.exp(1j * theta * np.arange(m.shape[0])).reshape((-1,) + (1,) * xa.ndim)
    val = np.real(np.einsum("m...,mn,n...->...", u.conj(), m, u))
    val = np.maximum(val, 0.0)
    return float(val) if np.ndim(val) == 0 else val


def homodyne_sample(rho: DensityOperator, theta: float, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` homodyne outcomes at phase ``theta`` by inverse-CDF sampling.

    The density is tabulated on 4096 points over [-8, 8] and the CDF is
    linearly interpolated. Output is a deterministic function of ``seed``.
    """
    if int(count) != count or count < 1:
        raise InvalidCount(f"sample count must be a positive integer, got {count!r}")
    grid = np.linspace(*SAMPLE_RANGE, SAMPLE_POINTS)
    pdf = quadrature_pdf(rho, theta, grid)
    cdf = np.concatenate(([0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(grid))))
    cdf /= cdf[-1]
    rng = np.random.default_rng(seed)
    u = rng.random(int(count))
    return np.interp(u, cdf, grid)
