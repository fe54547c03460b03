"""
Classical translation-invariant marginals.

A window distribution P over n consecutive sites extends to an infinite TI chain
iff its left and right (n-1)-site marginals agree. The extreme points of that set
are uniform distributions over irreducible domino loops: cyclic tile sequences in
which the last n-1 symbols of each tile are the first n-1 symbols of the next.
Those loops are exactly the simple cycles of the de Bruijn graph whose nodes are
(n-1)-tuples and whose edges are n-tuples, enumerated here with Johnson's
algorithm.

Symbols are 0-based throughout.
"""

import time
from collections import defaultdict
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from tichain.core.config import env
from tichain.core.errors import (
    CapExceededError,
    InconsistentMarginalError,
    InputFormatError,
    InvalidStateError,
    NumericalError,
)
from tichain.core.logger import logger
from tichain.core.metrics import record_enumeration

Tile = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class JointDistribution:
    d: int
    n: int
    probs: np.ndarray

    def __post_init__(self):
        if self.d < 1 or self.n < 1:
            raise InvalidStateError(f"invalid alphabet/window ({self.d}, {self.n})")
        arr = np.array(self.probs, dtype=float, copy=True)
        if arr.shape != (self.d,) * self.n:
            raise InvalidStateError(
                f"table shape {arr.shape} does not match d={self.d}, n={self.n}"
            )
        tol = env.PROBABILITY_TOL
        if arr.min() < -tol:
            raise InvalidStateError(f"negative probability {arr.min():.3e}")
        total = arr.sum()
        if abs(total - 1.0) > tol:
            raise InvalidStateError(f"probabilities sum to {total:.15g}, not 1")
        arr = np.clip(arr, 0.0, None)
        arr.flags.writeable = False
        object.__setattr__(self, "probs", arr)

    @classmethod
    def uniform(cls, d: int, n: int) -> "JointDistribution":
        return cls(d, n, np.full((d,) * n, 1.0 / d**n))

    @classmethod
    def product(cls, *site_probs: Sequence[float]) -> "JointDistribution":
        vectors = [np.asarray(p, dtype=float) for p in site_probs]
        table = vectors[0]
        for vec in vectors[1:]:
            table = np.multiply.outer(table, vec)
        return cls(len(vectors[0]), len(vectors), table)

    def marginal(self, sites: Sequence[int]) -> "JointDistribution":
        kept = sorted(set(sites))
        if not kept or kept[0] < 0 or kept[-1] >= self.n:
            raise InvalidStateError(f"invalid marginal sites {list(sites)}")
        dropped = tuple(s for s in range(self.n) if s not in kept)
        return JointDistribution(self.d, len(kept), self.probs.sum(axis=dropped))

    def support(self, tol: float | None = None) -> list[Tile]:
        threshold = env.DECOMPOSE_TOL if tol is None else tol
        return [tuple(int(x) for x in idx) for idx in np.argwhere(self.probs > threshold)]

    def to_dict(self) -> dict:
        sep = "" if self.d <= 10 else ","
        probs = {
            sep.join(str(x) for x in idx): float(self.probs[idx])
            for idx in np.ndindex(self.probs.shape)
            if self.probs[idx] > 0
        }
        return {"d": self.d, "n": self.n, "probs": probs}

    @classmethod
    def from_dict(cls, payload: dict) -> "JointDistribution":
        try:
            d, n = int(payload["d"]), int(payload["n"])
            entries = payload["probs"]
        except (KeyError, TypeError, ValueError) as e:
            raise InputFormatError(f"distribution needs integer d, n and probs: {e}")
        table = np.zeros((d,) * n)
        for key, value in entries.items():
            symbols = key.split(",") if d > 10 or "," in key else list(key)
            try:
                idx = tuple(int(s) for s in symbols)
            except ValueError:
                raise InputFormatError(f"invalid outcome string {key!r}")
            if len(idx) != n or any(not 0 <= s < d for s in idx):
                raise InputFormatError(f"outcome {key!r} outside alphabet {d}^{n}")
            table[idx] += float(value)
        return cls(d, n, table)


def _marginals_match(table: np.ndarray, tol: float) -> bool:
    if table.ndim <= 1:
        return True
    left = table.sum(axis=-1)
    right = table.sum(axis=0)
    if table.dtype == object:
        return bool(np.all(left == right))
    return bool(np.all(np.abs(left - right) <= tol))


def check_ti_consistency(P: JointDistribution, tol: float | None = None) -> bool:
    return _marginals_match(P.probs, env.CONSISTENCY_TOL if tol is None else tol)


def extend(P: JointDistribution, target_sites: int) -> JointDistribution:
    """TI extension of P to ``target_sites`` sites by Markov-chain recursion."""
    if target_sites < P.n:
        raise InvalidStateError(f"cannot extend {P.n} sites to {target_sites}")
    if not check_ti_consistency(P):
        raise InconsistentMarginalError("left and right marginals differ")

    # conditional of the last symbol given the preceding n-1
    prefix = P.probs.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        conditional = P.probs / np.expand_dims(prefix, -1)
    if P.n > 1:
        conditional[prefix == 0] = 1.0 / P.d

    Q = P.probs
    while Q.ndim < target_sites:
        pad = (1,) * (Q.ndim - (P.n - 1))
        Q = Q[..., None] * conditional.reshape(pad + conditional.shape)
    return JointDistribution(P.d, target_sites, Q)


def is_irreducible_loop(tiles: Sequence[Sequence[int]]) -> bool:
    """Closed domino chain that visits each (n-1)-symbol node at most once."""
    tiles = [tuple(t) for t in tiles]
    if not tiles:
        return False
    n = len(tiles[0])
    if n == 0 or any(len(t) != n for t in tiles):
        return False
    m = len(tiles)
    for s in range(m):
        if tiles[s][1:] != tiles[(s + 1) % m][:-1]:
            return False
    nodes = [t[:-1] for t in tiles]
    return len(set(nodes)) == m


def canonical_rotation(tiles: Sequence[Tile]) -> tuple[Tile, ...]:
    tiles = tuple(tuple(t) for t in tiles)
    return min(tiles[k:] + tiles[:k] for k in range(len(tiles)))


@dataclass(frozen=True)
class DominoLoop:
    tiles: tuple[Tile, ...]
    d: int
    n: int = field(init=False)

    def __post_init__(self):
        tiles = tuple(tuple(int(x) for x in t) for t in self.tiles)
        if not is_irreducible_loop(tiles):
            raise InvalidStateError(f"not an irreducible domino loop: {tiles}")
        if any(not 0 <= x < self.d for t in tiles for x in t):
            raise InvalidStateError(f"symbol outside alphabet of size {self.d}")
        object.__setattr__(self, "tiles", canonical_rotation(tiles))
        object.__setattr__(self, "n", len(tiles[0]))

    def __len__(self) -> int:
        return len(self.tiles)


@dataclass
class LoopDecomposition:
    terms: list[tuple[float, DominoLoop]]

    @property
    def total_weight(self) -> float:
        return float(sum(w for w, _ in self.terms))

    def recombine(self, d: int, n: int) -> np.ndarray:
        table = np.zeros((d,) * n)
        for weight, loop in self.terms:
            table += weight * _loop_table(loop)
        return table


def _loop_table(loop: DominoLoop) -> np.ndarray:
    table = np.zeros((loop.d,) * loop.n)
    for tile in loop.tiles:
        table[tile] += 1.0 / len(loop)
    return table


def loop_distribution(loop: DominoLoop) -> JointDistribution:
    return JointDistribution(loop.d, loop.n, _loop_table(loop))


def exact_loop_table(loop: DominoLoop) -> np.ndarray:
    """Object array of ``Fraction`` entries; exact twin of ``loop_distribution``."""
    table = np.full((loop.d,) * loop.n, Fraction(0), dtype=object)
    for tile in loop.tiles:
        table[tile] += Fraction(1, len(loop))
    return table


def is_exactly_consistent(table: np.ndarray) -> bool:
    return _marginals_match(table, 0.0)


def decode_tile(code: int, d: int, n: int) -> Tile:
    digits = []
    for _ in range(n):
        code, digit = divmod(code, d)
        digits.append(digit)
    return tuple(reversed(digits))


def _check_cap(d: int, n: int) -> None:
    if d < 1 or n < 1:
        raise InvalidStateError(f"invalid alphabet/window ({d}, {n})")
    if d**n > env.DEBRUIJN_EDGE_CAP:
        raise CapExceededError(
            f"de Bruijn graph for d={d}, n={n} has {d**n} edges, "
            f"cap is {env.DEBRUIJN_EDGE_CAP}"
        )


def _strong_components(nodes: Sequence[int], successors) -> list[list[int]]:
    """Strongly connected components with at least two nodes."""
    index = {v: i for i, v in enumerate(nodes)}
    rows, cols = [], []
    for v in nodes:
        for w in successors[v]:
            if w in index:
                rows.append(index[v])
                cols.append(index[w])
    graph = csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(len(nodes), len(nodes))
    )
    count, labels = connected_components(graph, directed=True, connection="strong")
    groups: list[list[int]] = [[] for _ in range(count)]
    for v, label in zip(nodes, labels):
        groups[label].append(v)
    return [g for g in groups if len(g) > 1]


def _unblock(node: int, blocked: set[int], B: dict[int, set[int]]) -> None:
    stack = {node}
    while stack:
        v = stack.pop()
        if v in blocked:
            blocked.remove(v)
            stack.update(B[v])
            B[v].clear()


def _cycles_through(start: int, allowed: set[int], successors) -> Iterator[list[int]]:
    def nbrs(v):
        return [w for w in successors[v] if w in allowed]

    path = [start]
    blocked = {start}
    closed: set[int] = set()
    B: dict[int, set[int]] = defaultdict(set)
    stack = [(start, nbrs(start))]
    while stack:
        node, pending = stack[-1]
        if pending:
            nxt = pending.pop()
            if nxt == start:
                yield list(path)
                closed.update(path)
            elif nxt not in blocked:
                path.append(nxt)
                stack.append((nxt, nbrs(nxt)))
                closed.discard(nxt)
                blocked.add(nxt)
                continue
        if not pending:
            if node in closed:
                _unblock(node, blocked, B)
            else:
                for w in nbrs(node):
                    B[w].add(node)
            stack.pop()
            path.pop()


def iter_simple_cycles(d: int, n: int) -> Iterator[list[int]]:
    """
    Yield every simple cycle of the de Bruijn graph as a list of tile codes.

    A tile code is the base-d integer of the n-tuple, most significant symbol
    first; ``decode_tile`` turns it back into a tuple. Consecutive codes in a
    yielded list overlap in n-1 symbols, cyclically.
    """
    _check_cap(d, n)
    if n == 1:
        # one node, d parallel self-loops
        for c in range(d):
            yield [c]
        return

    size = d ** (n - 1)
    successors = []
    for u in range(size):
        base = (u * d) % size
        successors.append([base + c for c in range(d) if base + c != u])
        if u in range(base, base + d):
            yield [u * d + u % d]

    sccs = _strong_components(range(size), successors)
    while sccs:
        scc = sccs.pop()
        allowed = set(scc)
        start = min(allowed)
        for cycle in _cycles_through(start, allowed, successors):
            m = len(cycle)
            yield [cycle[s] * d + cycle[(s + 1) % m] % d for s in range(m)]
        allowed.discard(start)
        sccs.extend(_strong_components(sorted(allowed), successors))


def enumerate_extreme_points(d: int, n: int) -> list[DominoLoop]:
    """All irreducible domino loops over {0..d-1}^n, canonically rotated and sorted."""
    started = time.perf_counter()
    loops = [
        DominoLoop(tuple(decode_tile(c, d, n) for c in codes), d)
        for codes in iter_simple_cycles(d, n)
    ]
    loops.sort(key=lambda loop: (len(loop), loop.tiles))
    elapsed = time.perf_counter() - started
    record_enumeration(d, n, len(loops), elapsed)
    logger.debug(f"Enumerated {len(loops)} domino loops for d={d}, n={n}")
    return loops


def _follow_support(R: np.ndarray, start: Tile, tol: float) -> list[Tile]:
    seen = {start[:-1]: 0}
    tiles = [start]
    node = start[1:]
    while node not in seen:
        seen[node] = len(tiles)
        candidates = np.flatnonzero(R[node] > tol)
        if candidates.size == 0:
            raise NumericalError(f"support of residual is not closed at node {node}")
        tile = node + (int(candidates[0]),)
        tiles.append(tile)
        node = tile[1:]
    return tiles[seen[node] :]


def decompose(P: JointDistribution) -> LoopDecomposition:
    """
    Write a TI-consistent P as a convex combination of loop distributions.

    Each round starts from the lexicographically smallest tile still in the
    support and follows the smallest successor tile until a node repeats. The
    loop closed there is removed at the minimum residual along it, so at least
    one support entry vanishes per round. Terms come back ordered by loop length
    and then by canonical tiles.
    """
    if not check_ti_consistency(P):
        raise InconsistentMarginalError("left and right marginals differ")

    tol = env.DECOMPOSE_TOL
    R = np.array(P.probs, dtype=float)
    weights: dict[DominoLoop, float] = {}
    budget = int(np.count_nonzero(R > tol))
    for _ in range(budget):
        support = np.argwhere(R > tol)
        if support.size == 0:
            break
        start = tuple(int(x) for x in support[0])
        cycle = _follow_support(R, start, tol)
        level = min(R[t] for t in cycle)
        for t in cycle:
            R[t] -= level
        if R.min() < -tol:
            raise NumericalError(f"residual went negative ({R.min():.3e})")
        np.clip(R, 0.0, None, out=R)
        loop = DominoLoop(tuple(cycle), P.d)
        weights[loop] = weights.get(loop, 0.0) + len(cycle) * level

    leftover = float(R[R > tol].sum())
    if leftover > 0:
        raise NumericalError(f"decomposition left residual mass {leftover:.3e}")
    terms = sorted(
        ((w, loop) for loop, w in weights.items()),
        key=lambda item: (len(item[1]), item[1].tiles),
    )
    logger.debug(f"Decomposed distribution into {len(terms)} loops")
    return LoopDecomposition(terms)
