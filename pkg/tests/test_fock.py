import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photonadd.errors import CutoffMismatch, ZeroNorm
from photonadd.fock import (
    CutoffConfig,
    DensityOperator,
    PureTwoModeState,
    annihilation_matrix,
    apply_mode,
    auto_cutoff,
    creation_matrix,
    fidelity,
    identity_matrix,
    normalize,
    pure_to_density,
    reduced_density,
    state_fidelity,
    tail_mass,
)
from photonadd.states import coherent_add, coherent_subtract, tmsv


def basis(n, dim):
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return v


def random_amplitudes(seed, dim):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return a / np.linalg.norm(a)


@pytest.mark.parametrize(
    "kwargs",
    [dict(n_max=0), dict(n_max=2.5), dict(n_max=3, norm_tol=0.0), dict(n_max=3, tail_tol=1e-3)],
)
def test_cutoff_config_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        CutoffConfig(**kwargs)


def test_creation_examples():
    c = CutoffConfig(6)
    adag = creation_matrix(c).matrix
    assert np.array_equal(adag @ basis(0, 7), basis(1, 7))
    assert np.allclose(adag @ basis(3, 7), 2 * basis(4, 7), atol=0, rtol=1e-15)
    assert not np.any(adag @ basis(6, 7))


def test_creation_matrix_entries():
    c = CutoffConfig(5)
    m = creation_matrix(c).matrix
    expected = np.zeros((6, 6))
    for n in range(5):
        expected[n + 1, n] = math.sqrt(n + 1)
    assert np.array_equal(m, expected)
    assert np.array_equal(annihilation_matrix(c).matrix, expected.T)
    assert creation_matrix(c).dagger().kind == "annihilation"


def test_annihilation_examples():
    c = CutoffConfig(6)
    a = annihilation_matrix(c).matrix
    assert np.array_equal(a @ basis(1, 7), basis(0, 7))
    assert not np.any(a @ basis(0, 7))
    assert np.allclose(a @ basis(4, 7), 2 * basis(3, 7), atol=0, rtol=1e-15)


@pytest.mark.parametrize("n_max", [1, 5, 40])
def test_number_operator_exact_below_cutoff(n_max):
    c = CutoffConfig(n_max)
    num = creation_matrix(c).matrix @ annihilation_matrix(c).matrix
    for n in range(n_max):
        # sqrt(n) * sqrt(n) is exact up to one rounding
        np.testing.assert_allclose(num @ basis(n, n_max + 1), n * basis(n, n_max + 1), rtol=4e-16, atol=0)


def test_apply_mode_examples():
    c = CutoffConfig(4)
    vac = PureTwoModeState.fock(0, 0, c)
    out, nsq = apply_mode(creation_matrix(c), 1, vac)
    assert out[1, 0] == 1 and nsq == 1.0 and np.count_nonzero(out) == 1
    out, nsq = apply_mode(annihilation_matrix(c), 1, vac)
    assert not np.any(out) and nsq == 0.0


def test_apply_mode_on_tmsv_shifts_column():
    c = CutoffConfig(20)
    state = tmsv(0.5, c)
    out, _ = apply_mode(creation_matrix(c), 2, state)
    # direct evaluation: <1,1|S> = sqrt(0.75)*0.5, then a2^dag gives sqrt(2)
    assert out[1, 2] == pytest.approx(math.sqrt(0.75) * 0.5 * math.sqrt(2), abs=1e-12)
    assert np.allclose(np.diag(out), 0)


def test_apply_mode_identity_is_bitwise():
    c = CutoffConfig(7)
    state, _ = normalize(random_amplitudes(3, 8), c)
    for which in (1, 2):
        out, nsq = apply_mode(identity_matrix(c), which, state)
        assert np.array_equal(out, state.amplitudes)
        assert nsq == pytest.approx(1.0)


def test_apply_mode_cutoff_mismatch():
    with pytest.raises(CutoffMismatch):
        apply_mode(creation_matrix(CutoffConfig(3)), 1, PureTwoModeState.fock(0, 0, CutoffConfig(4)))


def test_normalize_examples():
    c = CutoffConfig(3)
    amps = np.zeros((4, 4), dtype=complex)
    amps[0, 0] = 2.0
    state, norm = normalize(amps, c)
    assert norm == 2.0
    assert state.amplitudes[0, 0] == 1.0
    with pytest.raises(ZeroNorm):
        normalize(np.zeros((4, 4)), c)


def test_normalize_subtracted_tmsv_matches_closed_form():
    c = CutoffConfig(30)
    lam = 0.5
    state = tmsv(lam, c)
    raw = annihilation_matrix(c).matrix @ state.amplitudes + state.amplitudes @ annihilation_matrix(c).matrix.T
    out, _ = normalize(raw, c)
    expected = np.zeros((31, 31))
    for n in range(1, 31):
        expected[n - 1, n] = expected[n, n - 1] = (1 - lam**2) / math.sqrt(2) * lam ** (n - 1) * math.sqrt(n)
    assert np.allclose(out.amplitudes, expected, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100))
def test_normalize_idempotent(seed, scale):
    c = CutoffConfig(5)
    once, _ = normalize(scale * random_amplitudes(seed, 6), c)
    twice, norm = normalize(once.amplitudes, c)
    assert norm == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(once.amplitudes, twice.amplitudes, atol=1e-15)


def test_phase_convention_largest_amplitude_real_positive():
    c = CutoffConfig(5)
    state, _ = normalize(np.exp(2.1j) * random_amplitudes(11, 6), c)
    flat = state.amplitudes.ravel()
    k = np.argmax(np.abs(flat))
    assert flat[k].imag == pytest.approx(0, abs=1e-15) and flat[k].real > 0


def test_fidelity_examples():
    c = CutoffConfig(3)
    a = PureTwoModeState.fock(1, 0, c)
    b = PureTwoModeState.fock(0, 1, c)
    assert fidelity(a, a) == pytest.approx(1.0)
    assert fidelity(a, b) == 0.0


def test_fidelity_cpa_vs_cps():
    c = CutoffConfig(40)
    s = tmsv(0.4, c)
    assert fidelity(coherent_add(s, 1)[0], coherent_subtract(s, 1)[0]) >= 1 - 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 2 * math.pi))
def test_fidelity_symmetric_and_phase_blind(seed, phase):
    c = CutoffConfig(4)
    psi, _ = normalize(random_amplitudes(seed, 5), c)
    phi, _ = normalize(random_amplitudes(seed + 1, 5), c)
    assert fidelity(psi, phi) == pytest.approx(fidelity(phi, psi), abs=1e-15)
    rotated = PureTwoModeState(np.exp(1j * phase) * psi.amplitudes, c)
    assert fidelity(psi, rotated) == pytest.approx(1.0, abs=1e-12)
    # phase-align and compare entrywise
    k = np.argmax(np.abs(psi.vector))
    aligned = rotated.vector * psi.vector[k] / rotated.vector[k]
    assert np.allclose(aligned, psi.vector, atol=1e-9)
    if not np.allclose(psi.vector, phi.vector):
        assert fidelity(psi, phi) < 1 - 1e-9


def test_fidelity_cutoff_mismatch():
    with pytest.raises(CutoffMismatch):
        fidelity(PureTwoModeState.fock(0, 0, CutoffConfig(2)), PureTwoModeState.fock(0, 0, CutoffConfig(3)))


def test_state_fidelity_mixed_routes_agree():
    c = CutoffConfig(3)
    psi, _ = normalize(random_amplitudes(5, 4), c)
    phi, _ = normalize(random_amplitudes(6, 4), c)
    rho = pure_to_density(phi)
    assert state_fidelity(psi, rho) == pytest.approx(fidelity(psi, phi), abs=1e-12)
    assert state_fidelity(pure_to_density(psi), rho) == pytest.approx(fidelity(psi, phi), abs=1e-10)


def test_reduce_vacuum():
    c = CutoffConfig(3)
    r = reduced_density(PureTwoModeState.fock(0, 0, c), 1)
    assert r.mode_count == 1
    assert np.array_equal(r.matrix, np.diag([1, 0, 0, 0]).astype(complex))


@pytest.mark.parametrize("keep", [1, 2])
def test_reduce_delocalized_photon(keep):
    c = CutoffConfig(3)
    amps = np.zeros((4, 4))
    amps[1, 0] = amps[0, 1] = 1 / math.sqrt(2)
    state = PureTwoModeState(amps, c)
    r = reduced_density(state, keep)
    assert np.allclose(r.matrix, np.diag([0.5, 0.5, 0, 0]), atol=1e-15)
    assert np.allclose(reduced_density(pure_to_density(state), keep).matrix, r.matrix, atol=1e-15)


@pytest.mark.parametrize("keep", [1, 2])
def test_reduce_tmsv_is_thermal(keep):
    lam = 0.6
    c = CutoffConfig(auto_cutoff(lam))
    r = reduced_density(tmsv(lam, c), keep)
    n = np.arange(c.dim)
    assert np.allclose(r.matrix, np.diag((1 - lam**2) * lam ** (2 * n)), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2]))
def test_reduced_density_is_a_state(seed, keep):
    c = CutoffConfig(4)
    psi, _ = normalize(random_amplitudes(seed, 5), c)
    for src in (psi, pure_to_density(psi)):
        r = reduced_density(src, keep)
        assert abs(np.trace(r.matrix).real - 1) <= c.norm_tol
        assert np.linalg.eigvalsh(r.matrix)[0] >= -1e-9


def test_tail_mass_examples():
    assert tail_mass(PureTwoModeState.fock(0, 0, CutoffConfig(5))) == 0.0
    assert tail_mass(PureTwoModeState.fock(5, 0, CutoffConfig(5))) == 1.0
    assert tail_mass(PureTwoModeState.fock(5, 5, CutoffConfig(5))) == 1.0
    # geometric tail: (1 - 0.25) * 0.25**20
    assert tail_mass(tmsv(0.5, CutoffConfig(20))) < 1e-10


@pytest.mark.parametrize("lam", [0.0, 0.1, 0.3, 0.5, 0.7, 0.8, 0.95])
def test_auto_cutoff_minimal_and_clamped(lam):
    tol = 1e-8
    n = auto_cutoff(lam, tol)
    assert 8 <= n <= 256
    crit = lambda k: (1 - lam**2) * lam ** (2 * k) * (k + 1) < (tol / 10) ** 2
    if 8 < n < 256:
        assert crit(n) and not crit(n - 1)
    elif n == 8:
        assert crit(8)


def test_auto_cutoff_rejects_unphysical_lambda():
    with pytest.raises(ValueError):
        auto_cutoff(1.0)


@pytest.mark.parametrize(
    "matrix",
    [
        np.array([[1.0, 0.1], [0.0, 0.0]]),  # not Hermitian
        np.diag([0.7, 0.7]),  # trace 1.4
        np.diag([1.5, -0.5]),  # negative eigenvalue
    ],
)
def test_density_operator_invariants(matrix):
    with pytest.raises(ValueError):
        DensityOperator(matrix.astype(complex), 1, CutoffConfig(1))


def test_states_are_read_only():
    s = PureTwoModeState.fock(0, 0, CutoffConfig(2))
    with pytest.raises(ValueError):
        s.amplitudes[0, 0] = 2
