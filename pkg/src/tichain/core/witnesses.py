"""
Two-site correlation witnesses for translation-invariant qubit chains.

A witness is a real 3x3 matrix T read as W = Σ T_ij σ_i⊗σ_j. States with a
translation-invariant separable (TIS) extension satisfy tr(ρ₁₂W) ≤ W_T, where
W_T is bounded by ½ max_θ ‖e^{iθ}T + e^{-iθ}T†‖. For σy⊗σx that bound is 1/2,
while translation-invariant states without the separability constraint reach
2/π.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from tichain.core.classes import WitnessReport
from tichain.core.config import env
from tichain.core.errors import BracketError, InvalidStateError
from tichain.core.linalg import (
    PAULI_AXES,
    DensityMatrix,
    bloch_state,
    expectation,
    herm_eig,
    partial_transpose,
    pauli_product,
    spectral_norm,
)
from tichain.core.logger import logger
from tichain.core.symmetrize import size_bound

TI_SIGMA_YX_LIMIT = 2 / math.pi

# Bloch vectors of the period-3 product state whose symmetrization saturates
# the TIS bound of σy⊗σx.
RHO0_BLOCH = (
    (1 / math.sqrt(2), 1 / math.sqrt(2), 0.0),
    (-1 / math.sqrt(2), 1 / math.sqrt(2), 0.0),
    (1 / math.sqrt(2), -1 / math.sqrt(2), 0.0),
)

PPT_BRACKET = (0.25, 1.0)


@dataclass(frozen=True, eq=False)
class CorrelationWitness:
    T: np.ndarray
    name: str = ""

    def __post_init__(self):
        T = np.array(self.T, dtype=float, copy=True)
        if T.shape != (3, 3):
            raise InvalidStateError(f"witness matrix must be 3x3, got {T.shape}")
        if not np.all(np.isfinite(T)):
            raise InvalidStateError("witness matrix has non-finite entries")
        T.flags.writeable = False
        object.__setattr__(self, "T", T)

    def operator(self) -> np.ndarray:
        op = np.zeros((4, 4), dtype=complex)
        for i, a in enumerate(PAULI_AXES):
            for j, b in enumerate(PAULI_AXES):
                if self.T[i, j]:
                    op += self.T[i, j] * pauli_product(a, b)
        return op


def witness_from_label(label: str) -> CorrelationWitness:
    """
    Parse ``"yx"``, ``"-xy"`` or nine comma-separated numbers (row-major T).
    """
    text = label.strip().lower()
    if "," in text:
        try:
            values = [float(v) for v in text.split(",")]
        except ValueError:
            raise InvalidStateError(f"invalid witness matrix {label!r}")
        if len(values) != 9:
            raise InvalidStateError("a witness matrix needs nine entries")
        return CorrelationWitness(np.reshape(values, (3, 3)), name=label)

    sign = -1.0 if text.startswith("-") else 1.0
    axes = text.lstrip("+-")
    if len(axes) != 2 or any(a not in PAULI_AXES for a in axes):
        raise InvalidStateError(f"unknown witness label {label!r}")
    T = np.zeros((3, 3))
    T[PAULI_AXES.index(axes[0]), PAULI_AXES.index(axes[1])] = sign
    return CorrelationWitness(T, name=text)


def _rotated_norm(T: np.ndarray, theta: float) -> float:
    phase = np.exp(1j * theta)
    return spectral_norm(phase * T + np.conj(phase) * T.conj().T)


def wt_bound(T, theta_grid: int | None = None) -> float:
    """½ max over θ of ‖e^{iθ}T + e^{-iθ}T†‖, by grid scan plus bounded refinement."""
    T = np.asarray(T, dtype=complex)
    grid = env.THETA_GRID if theta_grid is None else theta_grid
    if grid < 64:
        raise InvalidStateError(f"theta grid needs at least 64 points, got {grid}")

    # θ -> θ+π only flips the sign, so [0, π) covers every norm
    thetas = np.linspace(0.0, math.pi, grid, endpoint=False)
    values = np.array([_rotated_norm(T, t) for t in thetas])
    k = int(np.argmax(values))
    step = math.pi / grid
    refined = minimize_scalar(
        lambda t: -_rotated_norm(T, t),
        bounds=(thetas[k] - step, thetas[k] + step),
        method="bounded",
        options={"xatol": env.THETA_XTOL},
    )
    best = max(float(values[k]), -float(refined.fun))
    return 0.5 * best


def wt_bound_finite(T, m: int) -> float:
    """
    The same bound restricted to loops of m product states.

    Only the m-th roots of unity enter, and the largest eigenvalue (not the norm)
    is what a loop can reach, so this is never above ``wt_bound``.
    """
    if m < 1:
        raise InvalidStateError(f"loop length must be positive, got {m}")
    T = np.asarray(T, dtype=complex)
    best = -math.inf
    for k in range(m):
        phase = np.exp(2j * math.pi * k / m)
        values, _ = herm_eig(phase * T + np.conj(phase) * T.conj().T)
        best = max(best, float(values[-1]))
    return 0.5 * best


def loop_witness_value(T, vectors) -> float:
    """(1/m) Σ_s v_s·T·v_{s+1} for a cyclic list of unit Bloch vectors."""
    V = np.asarray(vectors, dtype=float)
    return float(np.einsum("si,ij,sj->", V, np.asarray(T, dtype=float), np.roll(V, -1, axis=0)) / len(V))


def ti_sigma_yx_max(m: float) -> float:
    """Largest tr(ρ₁₂ σy⊗σx) over TI states of a ring of 2m+1 sites; 2/π for m = inf."""
    if m == math.inf:
        return TI_SIGMA_YX_LIMIT
    m = int(m)
    if m < 1:
        raise InvalidStateError(f"m must be at least 1, got {m}")
    size = 2 * m + 1
    k = np.arange(1, m + 1)
    return float(np.sum(2 * np.sin(2 * math.pi * k / size)) / size)


def ti_bound_for(T) -> float | None:
    """Translation-invariant bound for positive multiples of σy⊗σx or σx⊗σy."""
    T = np.asarray(T, dtype=float)
    for i, j in ((1, 0), (0, 1)):
        mask = np.zeros((3, 3), dtype=bool)
        mask[i, j] = True
        if T[i, j] > 0 and not np.any(T[~mask]):
            return float(T[i, j]) * TI_SIGMA_YX_LIMIT
    return None


def rho1_nn() -> DensityMatrix:
    matrix = (
        np.eye(4) / 4
        + (pauli_product("y", "x") + pauli_product("x", "y")) / (2 * math.pi)
        + pauli_product("z", "z") / math.pi**2
    )
    return DensityMatrix(matrix, (2, 2))


def rho0_tis() -> DensityMatrix:
    states = [bloch_state(v) for v in RHO0_BLOCH]
    matrix = sum(
        np.kron(states[(s + 1) % 3].matrix, states[s].matrix) for s in range(3)
    )
    return DensityMatrix(matrix / 3, (2, 2))


def rho_lambda(lam: float) -> DensityMatrix:
    if not 0.0 <= lam <= 1.0:
        raise InvalidStateError(f"lambda must lie in [0, 1], got {lam}")
    return DensityMatrix(
        lam * rho1_nn().matrix + (1 - lam) * rho0_tis().matrix, (2, 2)
    )


def separable_counterexample() -> DensityMatrix:
    """½(|+i⟩⟨+i|⊗|+⟩⟨+| + |-i⟩⟨-i|⊗|-⟩⟨-|): separable, maximally mixed marginals, σy⊗σx = 1."""
    plus = np.kron(bloch_state((0, 1, 0)).matrix, bloch_state((1, 0, 0)).matrix)
    minus = np.kron(bloch_state((0, -1, 0)).matrix, bloch_state((-1, 0, 0)).matrix)
    return DensityMatrix((plus + minus) / 2, (2, 2))


def min_pt_eigenvalue(rho: DensityMatrix, cut: int = 1) -> float:
    values, _ = herm_eig(partial_transpose(rho, cut))
    return float(values[0])


def is_ppt(rho: DensityMatrix, cut: int = 1) -> bool:
    return min_pt_eigenvalue(rho, cut) >= -env.VALIDITY_TOL


def ppt_threshold_closed_form() -> float:
    return 2 * math.pi**2 / (12 + 12 * math.pi - math.pi**2)


def ppt_threshold() -> float:
    """λ where the partial transpose of ρ^λ stops being positive, by bisection."""
    lo, hi = PPT_BRACKET

    def smallest(lam: float) -> float:
        return min_pt_eigenvalue(rho_lambda(lam))

    f_lo, f_hi = smallest(lo), smallest(hi)
    if f_lo <= 0 or f_hi >= 0:
        raise BracketError(
            f"partial transpose does not change sign on [{lo}, {hi}] "
            f"({f_lo:.3e}, {f_hi:.3e})"
        )
    threshold = bisect(smallest, lo, hi, xtol=env.PPT_BISECTION_XTOL)
    logger.debug(f"PPT threshold found at {threshold:.12f}")
    return float(threshold)


def evaluate_witness(
    rho12: DensityMatrix, w: CorrelationWitness, theta_grid: int | None = None
) -> WitnessReport:
    if rho12.site_dims != (2, 2):
        raise InvalidStateError(f"expected a two-qubit state, got {rho12.site_dims}")
    operator = w.operator()
    value = expectation(rho12, operator)
    tis_bound = wt_bound(w.T, theta_grid)
    violation = value - tis_bound

    excluded = None
    boundary = None
    if violation > env.VIOLATION_TOL:
        single = rho12.marginal((0,))
        boundary = expectation(single.tensor(single), operator)
        excluded = size_bound(tis_bound, violation, boundary)

    return WitnessReport(
        value=value,
        tis_bound=tis_bound,
        ti_bound=ti_bound_for(w.T),
        violation=violation,
        excluded_block_size=excluded,
        boundary_term=boundary,
        ppt=is_ppt(rho12),
    )
