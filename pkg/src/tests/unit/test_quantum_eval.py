import math

import numpy as np
import pytest

from tichain.core.config import env
from tichain.core.errors import CapExceededError, InvalidStateError
from tichain.core.polytope import BellInequality
from tichain.core.prometheus_metrics import PrometheusResult
from tichain.core.quantum_eval import (
    COMMENSURATE,
    DEFAULT_RINGS,
    INVERSE_N,
    LOCAL_DIM,
    LocalTerm,
    MeasurementPair,
    build_hamiltonian,
    dense_ring_hamiltonian,
    extrapolate,
    ground_energy_ring,
    local_term_spectrum,
    observable,
    product_state_energy,
    quantum_value,
    reduced_three_site,
    ring_ground_state,
    ring_operator,
)
from tichain.core.tables import I_G, I_T, TABLE2

SINGLE_SITE = BellInequality((1,) + (0,) * 9, -1)


def _random_term(rng, d: int = 4) -> LocalTerm:
    A = rng.standard_normal((d**3, d**3))
    return LocalTerm((A + A.T) / 2, local_dim=d)


def test_observables_are_dichotomic():
    """A0 and A1 square to the identity and are real symmetric."""
    mp = MeasurementPair(0.7, 2.3)
    for A in mp.observables():
        assert np.allclose(A @ A, np.eye(4))
        assert np.allclose(A, A.T)
    assert np.allclose(observable(mp, 0), np.diag([1, -1, 1, -1]))
    assert np.allclose(observable(MeasurementPair(), 1), observable(mp, 0))
    with pytest.raises(InvalidStateError):
        observable(mp, 2)


def test_local_term_validation():
    """Terms must be Hermitian and sized for three sites."""
    with pytest.raises(InvalidStateError):
        LocalTerm(np.eye(16))
    bad = np.zeros((64, 64))
    bad[0, 1] = 1.0
    with pytest.raises(InvalidStateError):
        LocalTerm(bad)
    term = LocalTerm(np.eye(64, dtype=complex))
    assert not np.iscomplexobj(term.matrix)
    assert not term.matrix.flags.writeable


@pytest.mark.parametrize("N", [3, 4, 5])
def test_matrix_free_operator_matches_dense(rng, N):
    """The tensordot matvec agrees with the dense kron construction."""
    term = _random_term(rng)
    H = dense_ring_hamiltonian(term, N)
    op = ring_operator(term, N)
    v = rng.standard_normal(4**N)
    assert np.allclose(op.matvec(v), H @ v)
    V = rng.standard_normal((4**N, 3))
    assert np.allclose(op.matmat(V), H @ V)


@pytest.mark.parametrize("N", [3, 4, 5, 6])
def test_ground_energy_matches_dense_diagonalization(N):
    """eigsh and dense eigvalsh give the same ground energy per site."""
    term = build_hamiltonian(I_G, MeasurementPair(TABLE2[4].theta, TABLE2[4].phi))
    dense = np.linalg.eigvalsh(dense_ring_hamiltonian(term, N))[0] / N
    assert math.isclose(ground_energy_ring(term, N), dense, abs_tol=1e-9)


def test_single_site_term_has_energy_minus_one():
    """A lone A0 term is minimised by every site answering -1."""
    term = build_hamiltonian(SINGLE_SITE, MeasurementPair())
    assert math.isclose(ground_energy_ring(term, 4), -1.0, abs_tol=1e-10)


def test_zero_term_returns_seeded_vector():
    """A vanishing Hamiltonian needs no eigensolve."""
    energy, psi = ring_ground_state(LocalTerm(np.zeros((64, 64))), 3)
    assert energy == 0.0
    assert math.isclose(np.linalg.norm(psi), 1.0)


def test_commuting_measurements_stay_classical():
    """With A1 = A0 the ring energy never beats the local bound."""
    term = build_hamiltonian(I_T, MeasurementPair(0.0, 0.0))
    for N in (3, 4, 5):
        assert ground_energy_ring(term, N) >= float(I_T.local_bound) - 1e-9


def test_reduced_state_reproduces_energy(rng):
    """tr(ρ̄ h) of the position-averaged reduced state equals E/N."""
    term = build_hamiltonian(I_T, MeasurementPair(TABLE2[2].theta, TABLE2[2].phi))
    energy, psi = ring_ground_state(term, 5)
    rho = reduced_three_site(psi, 5)
    assert rho.site_dims == (4, 4, 4)
    assert math.isclose(np.real(np.trace(rho.matrix @ term.matrix)), energy, abs_tol=1e-9)


def test_product_states_bound_ground_energy_from_above():
    """Any periodic product state costs at least the ground energy."""
    term = build_hamiltonian(I_G, MeasurementPair(TABLE2[4].theta, TABLE2[4].phi))
    basis = np.eye(4)
    states = [basis[1], basis[3], basis[0]]
    assert product_state_energy(term, states) >= ground_energy_ring(term, 6) - 1e-10
    with pytest.raises(InvalidStateError):
        product_state_energy(term, [])


def test_spectrum_gives_lower_bound():
    """The smallest eigenvalue of one term bounds the energy per site from below."""
    term = build_hamiltonian(I_T, MeasurementPair(TABLE2[2].theta, TABLE2[2].phi))
    assert ground_energy_ring(term, 4) >= local_term_spectrum(term)[0] - 1e-10


def test_extrapolate_recovers_linear_intercept():
    """Exactly linear data in 1/N extrapolates to its intercept."""
    sizes = [6, 8, 10]
    energies = [-4.0 + 0.3 / N for N in sizes]
    intercept, residual = extrapolate(sizes, energies, INVERSE_N)
    assert math.isclose(intercept, -4.0, abs_tol=1e-12)
    assert math.isclose(residual, 0.05, abs_tol=1e-12)
    assert extrapolate([6], [-4.1], INVERSE_N) == (-4.1, 0.0)
    with pytest.raises(InvalidStateError):
        extrapolate([6, 8], [-4.0], INVERSE_N)


def test_extrapolate_reads_largest_commensurate_ring():
    """Rings that frustrate a period-three state are skipped by the default estimate."""
    sizes = [6, 7, 8, 9]
    energies = [-4.208, -4.070, -4.163, -4.1835]
    estimate, residual = extrapolate(sizes, energies)
    assert estimate == -4.1835
    assert math.isclose(residual, 0.0245, abs_tol=1e-12)
    assert extrapolate([4, 5], [-3.0, -3.5], COMMENSURATE) == (-3.5, 0.5)
    with pytest.raises(InvalidStateError):
        extrapolate([6], [-4.0], "quadratic")


def test_default_rings_are_commensurate_and_within_cap():
    """Every default ring holds whole three-site periods and fits under the cap."""
    assert all(N % 3 == 0 for N in DEFAULT_RINGS)
    assert max(DEFAULT_RINGS) <= env.RING_SIZE_CAP


def test_quantum_value_extrapolation_model(mocker):
    """The model is validated before any eigensolve and is passed to the estimate."""
    solve = mocker.patch(
        "tichain.core.quantum_eval.ground_energy_ring", side_effect=[-4.0 + 0.3 / 6, -4.0 + 0.3 / 9]
    )
    with pytest.raises(InvalidStateError):
        quantum_value(I_T, MeasurementPair(), rings=[6, 9], model="quadratic")
    assert solve.call_count == 0
    result = quantum_value(I_T, MeasurementPair(), rings=[6, 9], model=INVERSE_N)
    assert math.isclose(result.extrapolated, -4.0, abs_tol=1e-12)
    assert result.energy_per_site == -4.0 + 0.3 / 9


def test_local_dimension_is_shared():
    """Observables, terms and reduced states all use the four-level site."""
    A1 = observable(MeasurementPair(0.3, 1.2), 1)
    assert A1.shape == (LOCAL_DIM, LOCAL_DIM)
    term = build_hamiltonian(I_T, MeasurementPair(0.3, 1.2))
    assert term.local_dim == LOCAL_DIM
    psi = np.zeros(LOCAL_DIM**3)
    psi[0] = 1.0
    assert tuple(reduced_three_site(psi, 3).site_dims) == (LOCAL_DIM,) * 3


def test_quantum_value_reports_every_ring():
    """Results carry the energies of every ring and the last one per site."""
    mp = MeasurementPair(TABLE2[2].theta, TABLE2[2].phi)
    result = quantum_value(I_T, mp, rings=[3, 4])
    assert result.ring_sizes == [3, 4]
    assert len(result.energies) == 2
    assert result.energy_per_site == result.energies[-1]


def test_quantum_value_ring_checks(mocker):
    """Ring sizes must increase, start at three and respect the cap."""
    mp = MeasurementPair()
    with pytest.raises(InvalidStateError):
        quantum_value(I_T, mp, rings=[6, 4])
    with pytest.raises(InvalidStateError):
        quantum_value(I_T, mp, rings=[])
    with pytest.raises(InvalidStateError):
        quantum_value(I_T, mp, rings=[2])
    mocker.patch.object(env, "RING_SIZE_CAP", 5)
    with pytest.raises(CapExceededError):
        quantum_value(I_T, mp, rings=[4, 6])


def test_eigensolves_are_recorded(metrics_spy):
    """Each ring solve increments the eigensolve counter for its size."""
    term = build_hamiltonian(I_T, MeasurementPair(0.3, 1.2))
    ground_energy_ring(term, 4)
    assert metrics_spy.eigensolves(4, PrometheusResult.SUCCESS) == 1
    assert metrics_spy.histogram_count("eigensolve_latency", ring_size="4") == 1


def test_dense_oracle_refuses_large_rings():
    """The dense oracle stops at dimension 4096."""
    with pytest.raises(CapExceededError):
        dense_ring_hamiltonian(build_hamiltonian(I_T, MeasurementPair()), 7)
