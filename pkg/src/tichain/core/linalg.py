"""
Dense complex linear algebra shared by the quantum-side modules.

Operators are plain ``numpy`` arrays; states are wrapped in :class:`DensityMatrix`,
which validates Hermiticity, positivity and normalisation once at construction
and is read-only afterwards.
"""

import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from tichain.core.config import env
from tichain.core.errors import InvalidStateError, NumericalError

PAULI_AXES = ("x", "y", "z")

_PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(index: str) -> np.ndarray:
    key = index.lower()
    if key not in _PAULI:
        raise InvalidStateError(f"unknown Pauli index {index!r}")
    return _PAULI[key].copy()


def kron(*matrices: np.ndarray) -> np.ndarray:
    if not matrices:
        return np.ones((1, 1), dtype=complex)
    return reduce(np.kron, matrices)


def pauli_product(*indices: str) -> np.ndarray:
    """``pauli_product("y", "x")`` is σy⊗σx."""
    return kron(*(pauli(i) for i in indices))


def spectral_norm(m: np.ndarray) -> float:
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, ord=2))


def _hermiticity_gap(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def herm_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and column eigenvectors of a Hermitian matrix."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidStateError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if _hermiticity_gap(m) > env.VALIDITY_TOL * scale:
        raise InvalidStateError("matrix is not Hermitian")

    values, vectors = np.linalg.eigh((m + m.conj().T) / 2)
    reconstructed = (vectors * values) @ vectors.conj().T
    norm = spectral_norm(m)
    error = spectral_norm(m - reconstructed)
    if error > env.RECONSTRUCTION_TOL * max(norm, np.finfo(float).tiny):
        raise NumericalError(
            f"eigendecomposition reconstruction error {error:.3e} exceeds tolerance"
        )
    return values, vectors


def _check_site(site: int, site_count: int) -> None:
    if not 0 <= site < site_count:
        raise InvalidStateError(
            f"site index {site} out of range for {site_count} sites"
        )


def partial_trace(
    matrix: np.ndarray, site_dims: tuple[int, ...], keep: tuple[int, ...]
) -> np.ndarray:
    """Trace out every site not in ``keep``; kept sites stay in chain order."""
    dims = tuple(site_dims)
    count = len(dims)
    for site in keep:
        _check_site(site, count)
    kept = set(keep)
    tensor = np.asarray(matrix).reshape(dims + dims)
    remaining = count
    for site in sorted((s for s in range(count) if s not in kept), reverse=True):
        tensor = np.trace(tensor, axis1=site, axis2=site + remaining)
        remaining -= 1
    size = math.prod(dims[s] for s in sorted(kept))
    return tensor.reshape(size, size)


def partial_transpose_matrix(
    matrix: np.ndarray, site_dims: tuple[int, ...], site: int
) -> np.ndarray:
    dims = tuple(site_dims)
    count = len(dims)
    _check_site(site, count)
    tensor = np.asarray(matrix).reshape(dims + dims)
    tensor = np.swapaxes(tensor, site, site + count)
    size = math.prod(dims)
    return tensor.reshape(size, size)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray
    site_dims: tuple[int, ...] = field(default=(2,))

    def __post_init__(self):
        dims = tuple(int(d) for d in self.site_dims)
        if not dims or any(d < 1 for d in dims):
            raise InvalidStateError(f"invalid site dimensions {self.site_dims}")
        arr = np.array(self.matrix, dtype=complex, copy=True)
        size = math.prod(dims)
        if arr.shape != (size, size):
            raise InvalidStateError(
                f"matrix shape {arr.shape} does not match site dimensions {dims}"
            )
        tol = env.VALIDITY_TOL
        if _hermiticity_gap(arr) > tol:
            raise InvalidStateError("density matrix is not Hermitian")
        trace = np.trace(arr).real
        if abs(trace - 1.0) > tol:
            raise InvalidStateError(f"density matrix trace {trace:.12g} != 1")
        smallest = np.linalg.eigvalsh((arr + arr.conj().T) / 2)[0]
        if smallest < -tol:
            raise InvalidStateError(
                f"density matrix has negative eigenvalue {smallest:.3e}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "matrix", arr)
        object.__setattr__(self, "site_dims", dims)

    @property
    def site_count(self) -> int:
        return len(self.site_dims)

    def marginal(self, sites: tuple[int, ...] | list[int]) -> "DensityMatrix":
        kept = tuple(sorted(sites))
        reduced = partial_trace(self.matrix, self.site_dims, kept)
        return DensityMatrix(reduced, tuple(self.site_dims[s] for s in kept))

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(
            np.kron(self.matrix, other.matrix), self.site_dims + other.site_dims
        )

    def expectation(self, op: np.ndarray) -> float:
        return expectation(self, op)


def expectation(rho: DensityMatrix, op: np.ndarray) -> float:
    """Real part of tr(ρ·op)."""
    return float(np.real(np.trace(rho.matrix @ np.asarray(op))))


def partial_transpose(rho: DensityMatrix, site: int) -> np.ndarray:
    return partial_transpose_matrix(rho.matrix, rho.site_dims, site)


def bloch_state(v) -> DensityMatrix:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise InvalidStateError(f"Bloch vector must have 3 components, got {v.shape}")
    length = float(np.linalg.norm(v))
    if length > 1.0 + env.VALIDITY_TOL:
        raise InvalidStateError(f"Bloch vector norm {length:.12g} exceeds 1")
    matrix = 0.5 * (_PAULI["i"] + sum(c * _PAULI[a] for c, a in zip(v, PAULI_AXES)))
    return DensityMatrix(matrix, (2,))


def product_state(*states: DensityMatrix) -> DensityMatrix:
    return reduce(lambda a, b: a.tensor(b), states)


def maximally_entangled(d: int = 2) -> DensityMatrix:
    psi = np.eye(d, dtype=complex).reshape(d * d) / math.sqrt(d)
    return DensityMatrix(np.outer(psi, psi.conj()), (d, d))
