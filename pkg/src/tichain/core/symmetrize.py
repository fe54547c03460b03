"""
Symmetrization of finite chain states and position-averaged structure factors.

One implementation serves both branches: a classical state is a
``JointDistribution`` composed with the outer product, a quantum state is a
``DensityMatrix`` composed with the Kronecker product.
"""

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from tichain.core.errors import InvalidStateError
from tichain.core.linalg import DensityMatrix
from tichain.core.marginals import JointDistribution

ChainState = JointDistribution | DensityMatrix

SIZE_BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class _Branch:
    sites: Callable[[ChainState], int]
    marginal: Callable[[ChainState, tuple[int, ...]], ChainState]
    compose: Callable[[ChainState, ChainState], ChainState]
    mix: Callable[[Sequence[tuple[float, ChainState]]], ChainState]
    distance: Callable[[ChainState, ChainState], float]


def _classical_mix(terms):
    first = terms[0][1]
    table = sum(w * s.probs for w, s in terms)
    return JointDistribution(first.d, first.n, table)


def _quantum_mix(terms):
    first = terms[0][1]
    return DensityMatrix(sum(w * s.matrix for w, s in terms), first.site_dims)


def _trace_norm(a: DensityMatrix, b: DensityMatrix) -> float:
    return float(np.abs(np.linalg.eigvalsh(a.matrix - b.matrix)).sum())


_CLASSICAL = _Branch(
    sites=lambda s: s.n,
    marginal=lambda s, sites: s.marginal(sites),
    compose=lambda a, b: JointDistribution(
        a.d, a.n + b.n, np.multiply.outer(a.probs, b.probs)
    ),
    mix=_classical_mix,
    distance=lambda a, b: float(np.abs(a.probs - b.probs).sum()),
)

_QUANTUM = _Branch(
    sites=lambda s: s.site_count,
    marginal=lambda s, sites: s.marginal(sites),
    compose=lambda a, b: a.tensor(b),
    mix=_quantum_mix,
    distance=_trace_norm,
)


def _branch(omega: ChainState) -> _Branch:
    if isinstance(omega, JointDistribution):
        return _CLASSICAL
    if isinstance(omega, DensityMatrix):
        if len(set(omega.site_dims)) != 1:
            raise InvalidStateError("chain state needs a uniform local dimension")
        return _QUANTUM
    raise InvalidStateError(f"unsupported chain state {type(omega).__name__}")


def _check_window(r: int, n: int, minimum: int = 1) -> None:
    if not minimum <= r <= n:
        raise InvalidStateError(f"window {r} outside [{minimum}, {n}]")


def symmetrize_marginal(omega: ChainState, r: int) -> ChainState:
    """
    r-site marginal of the uniform mixture of all cyclic translations of ω.

    Windows that fit inside the chain contribute ω[k..k+r-1]; windows that wrap
    around contribute the product of the tail ω[n-r+k..n-1] and the head ω[0..k-1].
    """
    branch = _branch(omega)
    n = branch.sites(omega)
    _check_window(r, n)

    terms = [
        branch.marginal(omega, tuple(range(k, k + r))) for k in range(n - r + 1)
    ]
    for k in range(1, r):
        tail = branch.marginal(omega, tuple(range(n - r + k, n)))
        head = branch.marginal(omega, tuple(range(k)))
        terms.append(branch.compose(tail, head))
    return branch.mix([(1.0 / n, term) for term in terms])


def structure_factor(omega: ChainState, r: int) -> ChainState:
    """Average over positions of the two-site marginal at separation r-1."""
    branch = _branch(omega)
    n = branch.sites(omega)
    _check_window(r, n, minimum=2)
    count = n - r + 1
    return branch.mix(
        [(1.0 / count, branch.marginal(omega, (k, k + r - 1))) for k in range(count)]
    )


def structure_factor_discrepancy(omega: ChainState, r: int) -> float:
    """ℓ1 (trace-norm) distance between the symmetrized (1, r) marginal and the structure factor."""
    branch = _branch(omega)
    symmetrized = branch.marginal(symmetrize_marginal(omega, r), (0, r - 1))
    return branch.distance(symmetrized, structure_factor(omega, r))


def symmetrized_two_site(state: ChainState, n: int) -> ChainState:
    """
    Nearest-neighbour marginal of an n-site block repeated around a ring.

    Every one of the n bonds but the block boundary carries the two-site state;
    the boundary bond carries the product of single-site marginals.
    """
    branch = _branch(state)
    if branch.sites(state) != 2:
        raise InvalidStateError("expected a two-site state")
    if n < 1:
        raise InvalidStateError(f"block size must be positive, got {n}")
    single = branch.marginal(state, (0,))
    boundary = branch.compose(single, single)
    return branch.mix([((n - 1) / n, state), (1.0 / n, boundary)])


def size_bound(S: float, delta: float, boundary_term: float) -> int:
    """Largest block size n with (n-1)·Δ ≤ S - boundary_term."""
    if delta <= 0:
        raise InvalidStateError(f"violation must be positive, got {delta}")
    return math.floor((S - boundary_term) / delta + 1 + SIZE_BOUND_SLACK)
