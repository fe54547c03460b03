"""
See-saw over states and measurements with a classical TI register.

Each site also holds a register label; the labels of a register loop of
length m advance by one per site, so site k measures with the set
A^{(s+k mod m)}. Averaged over the loop, the Bell operator is the 3-local term

    h = (1/m) Σ_i h[A^(i), A^(i+1), A^(i+2)]

which is linear in every single observable once m ≥ 3. The state step is the
ring ground state of h; the measurement step replaces each A^(i)_x in turn by
-sgn(F), the exact minimizer of tr(F A) over -𝕀 ⪯ A ⪯ 𝕀.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import ortho_group

from tichain.core.classes import SeesawResult
from tichain.core.config import env
from tichain.core.errors import InvalidStateError, NumericalError
from tichain.core.linalg import DensityMatrix, herm_eig
from tichain.core.logger import format_array, logger
from tichain.core.metrics import record_seesaw_half_step
from tichain.core.polytope import BellInequality
from tichain.core.prometheus_metrics import SeesawStep
from tichain.core.quantum_eval import (
    LOCAL_DIM,
    WINDOW,
    LocalTerm,
    MeasurementPair,
    Observables,
    bell_term,
    reduced_three_site,
    ring_ground_state,
)

# (slot, einsum contracting the other two slots) for rho indexed [a,b,c,A,B,C]
_SLOT_CONTRACTIONS = (
    "abcABC,Bb,Cc->aA",
    "abcABC,Aa,Cc->bB",
    "abcABC,Aa,Bb->cC",
)


@dataclass(frozen=True, eq=False)
class RegisterMeasurements:
    sets: tuple[Observables, ...]

    def __post_init__(self):
        sets = tuple((np.asarray(a0), np.asarray(a1)) for a0, a1 in self.sets)
        if len(sets) < WINDOW:
            raise InvalidStateError(
                f"register size must be at least {WINDOW}, got {len(sets)}"
            )
        for i, pair in enumerate(sets):
            for x, A in enumerate(pair):
                values, _ = herm_eig(A)
                if values[0] < -1 - 1e-9 or values[-1] > 1 + 1e-9:
                    raise InvalidStateError(
                        f"observable {x} of register label {i} leaves [-1, 1]"
                    )
        object.__setattr__(self, "sets", sets)

    @property
    def m(self) -> int:
        return len(self.sets)

    @classmethod
    def uniform(cls, mp: MeasurementPair, m: int) -> "RegisterMeasurements":
        return cls(tuple(mp.observables() for _ in range(m)))

    @classmethod
    def random(cls, m: int, seed: int, d: int = LOCAL_DIM) -> "RegisterMeasurements":
        """Random real dichotomic observables with a balanced ±1 spectrum."""
        rng = np.random.default_rng(seed)
        signs = np.diag([1.0, -1.0] * (d // 2) + [1.0] * (d % 2))
        sets = []
        for _ in range(m):
            pair = []
            for _ in range(2):
                Q = ortho_group.rvs(d, random_state=rng)
                pair.append(Q @ signs @ Q.T)
            sets.append(tuple(pair))
        return cls(tuple(sets))

    def replace(self, i: int, x: int, A: np.ndarray) -> "RegisterMeasurements":
        sets = list(self.sets)
        pair = list(sets[i])
        pair[x] = A
        sets[i] = tuple(pair)
        return RegisterMeasurements(tuple(sets))


def register_term(ineq: BellInequality, meas: RegisterMeasurements) -> LocalTerm:
    m = meas.m
    h = sum(
        bell_term(
            ineq.coefficients,
            meas.sets[i],
            meas.sets[(i + 1) % m],
            meas.sets[(i + 2) % m],
        )
        for i in range(m)
    )
    return LocalTerm(h / m)


def _objective(term: LocalTerm, rho: DensityMatrix) -> float:
    return float(np.real(np.trace(rho.matrix @ term.matrix)))


def effective_operator(
    ineq: BellInequality,
    meas: RegisterMeasurements,
    rho: DensityMatrix,
    i: int,
    x: int,
) -> np.ndarray:
    """F with objective = tr(F A^(i)_x) + terms independent of A^(i)_x."""
    c = [float(v) for v in ineq.coefficients]
    m = meas.m
    d = rho.site_dims[0]
    R = rho.matrix.reshape((d,) * (2 * WINDOW))
    eye = np.eye(d)

    def contract(slot: int, first: np.ndarray, second: np.ndarray) -> np.ndarray:
        return np.einsum(_SLOT_CONTRACTIONS[slot], R, first, second)

    F = c[x] * contract(0, eye, eye)
    for y in (0, 1):
        ab, ac = c[2 + 2 * x + y], c[6 + 2 * x + y]
        if ab:
            F = F + ab * contract(0, meas.sets[(i + 1) % m][y], eye)
        if ac:
            F = F + ac * contract(0, eye, meas.sets[(i + 2) % m][y])
        # A^(i)_x as the second or third factor of an earlier window
        ba, ca = c[2 + 2 * y + x], c[6 + 2 * y + x]
        if ba:
            F = F + ba * contract(1, meas.sets[(i - 1) % m][y], eye)
        if ca:
            F = F + ca * contract(2, meas.sets[(i - 2) % m][y], eye)
    F = (F + F.conj().T) / (2 * m)
    if np.max(np.abs(F.imag), initial=0.0) <= env.VALIDITY_TOL:
        F = F.real
    return F


def optimal_observable(F: np.ndarray) -> np.ndarray:
    """-sgn(F); zero eigenvalues map to +1 so the result stays dichotomic."""
    values, vectors = herm_eig(F)
    signs = np.where(values > 0, -1.0, 1.0)
    A = (vectors * signs) @ vectors.conj().T
    if np.iscomplexobj(A) and np.max(np.abs(A.imag), initial=0.0) <= env.VALIDITY_TOL:
        A = A.real
    return (A + A.conj().T) / 2


def _check_monotone(history: list[float], step: SeesawStep) -> None:
    if len(history) < 2:
        return
    prev, cur = history[-2], history[-1]
    if cur > prev + env.SEESAW_TOL * max(1.0, abs(prev)):
        raise NumericalError(
            f"see-saw objective increased in the {step} step: {prev:.12f} -> {cur:.12f}"
        )


def seesaw(
    ineq: BellInequality,
    m: int = 3,
    N: int = 9,
    max_iters: int | None = None,
    seed: int = 0,
    initial: MeasurementPair | None = None,
) -> tuple[SeesawResult, RegisterMeasurements]:
    if m < WINDOW:
        raise InvalidStateError(f"register size must be at least {WINDOW}, got {m}")
    max_iters = env.SEESAW_MAX_ITERS if max_iters is None else max_iters
    if max_iters < 1:
        raise InvalidStateError(f"max_iters must be positive, got {max_iters}")

    meas = (
        RegisterMeasurements.uniform(initial, m)
        if initial is not None
        else RegisterMeasurements.random(m, seed)
    )
    history: list[float] = []
    converged = False
    iterations = 0
    last_state_value: float | None = None

    with logger.contextualize(inequality=ineq.name or "custom", ring_size=N):
        for iterations in range(1, max_iters + 1):
            term = register_term(ineq, meas)
            value, psi = ring_ground_state(term, N)
            rho = reduced_three_site(psi, N, term.local_dim)
            history.append(value)
            record_seesaw_half_step(SeesawStep.STATE)
            _check_monotone(history, SeesawStep.STATE)

            if last_state_value is not None and last_state_value - value <= (
                env.SEESAW_TOL * max(1.0, abs(value))
            ):
                converged = True
                break
            last_state_value = value

            for i in range(m):
                for x in (0, 1):
                    F = effective_operator(ineq, meas, rho, i, x)
                    meas = meas.replace(i, x, optimal_observable(F))
            history.append(_objective(register_term(ineq, meas), rho))
            record_seesaw_half_step(SeesawStep.MEASUREMENT)
            _check_monotone(history, SeesawStep.MEASUREMENT)
            logger.debug(
                f"See-saw iteration {iterations}: state {value:.10f}, "
                f"measurements {history[-1]:.10f}"
            )

    best = min(history)
    logger.debug(f"See-saw history: {format_array(history, limit=12)}")
    if not converged:
        logger.warning(
            f"See-saw stopped after {iterations} iterations without converging; "
            f"best value {best:.10f}"
        )
    result = SeesawResult(
        value=best,
        converged=converged,
        iterations=iterations,
        history=history,
        register_size=m,
        ring_size=N,
    )
    return result, meas
