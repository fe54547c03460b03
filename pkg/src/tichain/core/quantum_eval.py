"""
Quantum values of TI Bell inequalities at fixed measurements.

Every site holds a four-level system measured with A0 = M(0, 0) and
A1 = M(θ, φ). A Bell functional then becomes a 3-local Hamiltonian whose
ground-state energy per site is the quantum value. The infinite chain is
approximated by periodic rings solved with ``eigsh`` on a matrix-free
operator. Rings whose size is a multiple of three fit period-three ground
states; the default estimate reads off the largest such ring, and a linear
fit in 1/N is available.
"""

import math
import time
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, LinearOperator, eigsh

from tichain.core.classes import GroundResult
from tichain.core.config import env
from tichain.core.errors import CapExceededError, EigensolverError, InvalidStateError
from tichain.core.linalg import DensityMatrix, herm_eig, kron
from tichain.core.logger import format_array, logger
from tichain.core.metrics import record_eigensolve
from tichain.core.polytope import INPUT_PAIRS, BellInequality
from tichain.core.prometheus_metrics import PrometheusResult

WINDOW = 3
# two real reflection blocks per observable
LOCAL_DIM = 4
DEFAULT_RINGS = (6, 9)
COMMENSURATE = "commensurate"
INVERSE_N = "inverse-n"

Observables = tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True)
class MeasurementPair:
    theta: float = 0.0
    phi: float = 0.0

    def observables(self) -> Observables:
        return observable(self, 0), observable(self, 1)


def _block(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, s], [s, -c]])


def observable(mp: MeasurementPair, which: int) -> np.ndarray:
    """A0 = diag(1, -1, 1, -1); A1 = M(θ, φ), two real reflection blocks."""
    if which not in (0, 1):
        raise InvalidStateError(f"input must be 0 or 1, got {which}")
    theta, phi = (0.0, 0.0) if which == 0 else (mp.theta, mp.phi)
    A = np.zeros((LOCAL_DIM, LOCAL_DIM))
    A[:2, :2] = _block(theta)
    A[2:, 2:] = _block(phi)
    return A


@dataclass(frozen=True, eq=False)
class LocalTerm:
    """One translation unit h acting on sites (i, i+1, i+2)."""

    matrix: np.ndarray
    local_dim: int = LOCAL_DIM

    def __post_init__(self):
        h = np.array(self.matrix, copy=True)
        size = self.local_dim**WINDOW
        if h.shape != (size, size):
            raise InvalidStateError(
                f"a {WINDOW}-site term needs shape {(size, size)}, got {h.shape}"
            )
        scale = max(1.0, float(np.max(np.abs(h), initial=0.0)))
        if np.max(np.abs(h - h.conj().T), initial=0.0) > env.VALIDITY_TOL * scale:
            raise InvalidStateError("local term is not Hermitian")
        if np.iscomplexobj(h) and not np.any(h.imag):
            h = h.real
        h.flags.writeable = False
        object.__setattr__(self, "matrix", h)

    def as_tensor(self) -> np.ndarray:
        return self.matrix.reshape((self.local_dim,) * (2 * WINDOW))


def bell_term(
    coefficients: Sequence[float],
    first: Observables,
    second: Observables,
    third: Observables,
) -> np.ndarray:
    """C_x A_x⊗𝕀⊗𝕀 + C^AB_xy A_x⊗B_y⊗𝕀 + C^AC_xy A_x⊗𝕀⊗C_y with per-slot observables."""
    c = [float(v) for v in coefficients]
    d = first[0].shape[0]
    eye = np.eye(d)
    h = np.zeros((d**WINDOW, d**WINDOW), dtype=np.result_type(*first, *second, *third))
    for x in (0, 1):
        if c[x]:
            h += c[x] * kron(first[x], eye, eye)
    for k, (x, y) in enumerate(INPUT_PAIRS):
        if c[2 + k]:
            h += c[2 + k] * kron(first[x], second[y], eye)
        if c[6 + k]:
            h += c[6 + k] * kron(first[x], eye, third[y])
    return h


def build_hamiltonian(ineq: BellInequality, mp: MeasurementPair) -> LocalTerm:
    ops = mp.observables()
    return LocalTerm(bell_term(ineq.coefficients, ops, ops, ops))


def _check_ring(N: int) -> None:
    if N < WINDOW:
        raise InvalidStateError(f"ring size must be at least {WINDOW}, got {N}")
    if N > env.RING_SIZE_CAP:
        raise CapExceededError(
            f"ring size {N} exceeds RING_SIZE_CAP={env.RING_SIZE_CAP}"
        )


def _apply_ring(term: LocalTerm, N: int, v: np.ndarray) -> np.ndarray:
    """Σ_k h_{k,k+1,k+2 mod N} applied to v; a trailing batch axis is carried along."""
    d = term.local_dim
    h = term.as_tensor()
    vr = v.reshape((d,) * N + v.shape[1:])
    out = np.zeros(vr.shape, dtype=np.result_type(h, vr))
    for k in range(N):
        sites = [(k + j) % N for j in range(WINDOW)]
        moved = np.tensordot(vr, h, axes=(sites, [3, 4, 5]))
        out += np.moveaxis(moved, [-3, -2, -1], sites)
    return out.reshape(v.shape)


def ring_operator(term: LocalTerm, N: int) -> LinearOperator:
    _check_ring(N)
    D = term.local_dim**N
    return LinearOperator(
        (D, D),
        matvec=lambda v: _apply_ring(term, N, v),
        matmat=lambda V: _apply_ring(term, N, V),
        dtype=term.matrix.dtype,
    )


def dense_ring_hamiltonian(term: LocalTerm, N: int) -> np.ndarray:
    """Dense Σ_k h_k built from kron products and site translations."""
    _check_ring(N)
    d = term.local_dim
    D = d**N
    if D > 4096:
        raise CapExceededError(f"dense ring Hamiltonian of dimension {D} refused")
    H0 = kron(term.matrix, np.eye(d ** (N - WINDOW))).reshape((d,) * (2 * N))
    H = np.zeros((d,) * (2 * N), dtype=H0.dtype)
    for k in range(N):
        rows = [(p - k) % N for p in range(N)]
        H += H0.transpose(rows + [N + r for r in rows])
    return H.reshape(D, D)


def ring_ground_state(term: LocalTerm, N: int) -> tuple[float, np.ndarray]:
    """Ground-state energy per site and normalized ground vector of the ring."""
    _check_ring(N)
    D = term.local_dim**N
    v0 = np.random.default_rng(env.EIGSH_SEED).standard_normal(D)
    if not np.any(term.matrix):
        return 0.0, v0 / np.linalg.norm(v0)

    started = time.perf_counter()
    with logger.contextualize(ring_size=N):
        try:
            values, vectors = eigsh(
                ring_operator(term, N),
                k=1,
                which="SA",
                v0=v0.astype(term.matrix.dtype),
                tol=env.EIGSH_TOL,
                maxiter=env.EIGSH_MAX_ITERS,
            )
        except (ArpackNoConvergence, ArpackError) as e:
            record_eigensolve(N, PrometheusResult.ERROR, time.perf_counter() - started)
            raise EigensolverError(f"eigsh did not converge on ring {N}: {e}")
        elapsed = time.perf_counter() - started
        record_eigensolve(N, PrometheusResult.SUCCESS, elapsed)
        energy = float(values[0]) / N
        logger.debug(f"Ring {N}: E/N = {energy:.10f} in {elapsed:.2f}s")
    psi = vectors[:, 0]
    return energy, psi / np.linalg.norm(psi)


def ground_energy_ring(term: LocalTerm, N: int) -> float:
    return ring_ground_state(term, N)[0]


def reduced_three_site(psi: np.ndarray, N: int, local_dim: int = LOCAL_DIM) -> DensityMatrix:
    """Three-site reduced state of a ring vector, averaged over positions."""
    _check_ring(N)
    tensor = np.asarray(psi).reshape((local_dim,) * N)
    size = local_dim**WINDOW
    rho = np.zeros((size, size), dtype=complex)
    for k in range(N):
        t = tensor.transpose([(k + j) % N for j in range(N)]).reshape(size, -1)
        rho += t @ t.conj().T
    rho /= np.real(np.trace(rho))
    return DensityMatrix(rho, (local_dim,) * WINDOW)


def product_state_energy(term: LocalTerm, states: Sequence[np.ndarray]) -> float:
    """
    Energy per site of a periodic product state (one vector per site in the
    period); an upper bound on every ground energy per site it fits.
    """
    vectors = [np.asarray(s, dtype=complex) / np.linalg.norm(s) for s in states]
    if not vectors:
        raise InvalidStateError("need at least one site state")
    p = len(vectors)
    total = 0.0
    for k in range(p):
        phi = kron(*(vectors[(k + j) % p].reshape(-1, 1) for j in range(WINDOW)))
        total += float(np.real(phi.conj().T @ term.matrix @ phi).item())
    return total / p


def extrapolate(
    ring_sizes: Sequence[int], energies: Sequence[float], model: str | None = None
) -> tuple[float, float]:
    """
    Infinite-chain estimate from ring energies per site.

    ``commensurate`` takes the largest ring whose size is a multiple of the
    three-site term, or the largest ring when none is. ``inverse-n`` fits E/N
    linearly in 1/N through the two largest rings.

    Returns the estimate and its distance from the smallest-ring energy.
    """
    model = env.EXTRAPOLATION if model is None else model
    if len(ring_sizes) != len(energies) or not ring_sizes:
        raise InvalidStateError("need one energy per ring size")
    if model == INVERSE_N:
        if len(ring_sizes) == 1:
            return float(energies[0]), 0.0
        inv = 1.0 / np.asarray(ring_sizes[-2:], dtype=float)
        slope, estimate = np.polyfit(inv, np.asarray(energies[-2:], dtype=float), 1)
    elif model == COMMENSURATE:
        matched = [e for N, e in zip(ring_sizes, energies) if N % WINDOW == 0]
        estimate = matched[-1] if matched else energies[-1]
    else:
        raise InvalidStateError(f"unknown extrapolation model {model!r}")
    return float(estimate), abs(float(estimate) - float(energies[0]))


def quantum_value(
    ineq: BellInequality,
    mp: MeasurementPair,
    rings: Sequence[int] = DEFAULT_RINGS,
    model: str | None = None,
) -> GroundResult:
    rings = [int(N) for N in rings]
    if not rings:
        raise InvalidStateError("at least one ring size is required")
    if any(b <= a for a, b in zip(rings, rings[1:])):
        raise InvalidStateError(f"ring sizes must increase, got {rings}")
    for N in rings:
        _check_ring(N)
    if model not in (None, COMMENSURATE, INVERSE_N):
        raise InvalidStateError(f"unknown extrapolation model {model!r}")

    term = build_hamiltonian(ineq, mp)
    with logger.contextualize(inequality=ineq.name or "custom"):
        energies = [ground_energy_ring(term, N) for N in rings]
        extrapolated, residual = extrapolate(rings, energies, model)
        logger.info(
            f"{ineq.name or 'inequality'} at θ={mp.theta}, φ={mp.phi}: "
            f"extrapolated {extrapolated:.6f} from rings {rings}"
        )
        logger.debug(f"Ring energies per site: {format_array(energies)}")
    return GroundResult(
        energy_per_site=energies[-1],
        ring_sizes=rings,
        energies=energies,
        extrapolated=extrapolated,
        residual=residual,
    )


def local_term_spectrum(term: LocalTerm) -> np.ndarray:
    """Eigenvalues of one term; N·min gives a lower bound on any ring energy."""
    return herm_eig(term.matrix)[0]
