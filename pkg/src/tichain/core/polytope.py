"""
The classical translation-invariant Bell polytope for two inputs and two outputs.

A site's local strategy s ∈ {0, 1, 2, 3} answers a(0) = s & 1 and a(1) = s >> 1;
its ±1 value for input x is (-1)^{a(x)}. Classical TI boxes are mixtures of
uniform distributions over irreducible domino loops of strategies, so the
polytope vertices come from de Bruijn cycles over four symbols with a window of
three sites. Coordinates are the ten correlators named in ``CORRELATOR_NAMES``.

Vertices are stored exactly as integer numerators over the common denominator
``env.behavior_denominator``.
"""

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix, hstack

from tichain.core.classes import FacetCheck
from tichain.core.config import CORRELATOR_NAMES, env
from tichain.core.errors import InputFormatError, InvalidStateError, LPError
from tichain.core.facets import affine_rank, double_description
from tichain.core.logger import logger
from tichain.core.lp import convex_membership, solve_exact, solve_highs
from tichain.core.marginals import JointDistribution, iter_simple_cycles
from tichain.core.metrics import record_facets

STRATEGIES = (0, 1, 2, 3)
INPUT_PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))
DIMENSION = len(CORRELATOR_NAMES)


def response(strategy: int, x: int) -> int:
    return (strategy >> x) & 1


def val(strategy: int, x: int) -> int:
    return 1 - 2 * response(strategy, x)


@dataclass(frozen=True)
class Behavior:
    values: tuple

    def __post_init__(self):
        values = tuple(self.values)
        if len(values) != DIMENSION:
            raise InvalidStateError(
                f"a behavior has {DIMENSION} correlators, got {len(values)}"
            )
        if any(abs(v) > 1 + env.VALIDITY_TOL for v in values):
            raise InvalidStateError("correlators must lie in [-1, 1]")
        object.__setattr__(self, "values", values)

    @property
    def E0(self):
        return self.values[0]

    @property
    def E1(self):
        return self.values[1]

    @property
    def E12(self) -> tuple:
        return self.values[2:6]

    @property
    def E13(self) -> tuple:
        return self.values[6:10]

    @classmethod
    def from_scaled(cls, row: Sequence[int], denominator: int) -> "Behavior":
        return cls(tuple(Fraction(int(v), denominator) for v in row))

    @classmethod
    def deterministic(cls, s1: int, s2: int, s3: int) -> "Behavior":
        return cls(tuple(_tile_vector(s1, s2, s3)))

    @classmethod
    def from_box(cls, box: "TripartiteBox") -> "Behavior":
        """Correlators of a tripartite box: sites (1, 2) for E12 and (1, 3) for E13."""
        sign = np.array([1, -1])
        P = box.probs
        single = [
            float(np.einsum("a,abc->", sign, P[:, :, :, x, 0, 0])) for x in (0, 1)
        ]
        e12 = [
            float(np.einsum("a,b,abc->", sign, sign, P[:, :, :, x, y, 0]))
            for x, y in INPUT_PAIRS
        ]
        e13 = [
            float(np.einsum("a,c,abc->", sign, sign, P[:, :, :, x, 0, y]))
            for x, y in INPUT_PAIRS
        ]
        return cls(tuple(single + e12 + e13))

    def to_dict(self) -> dict:
        return {name: json_number(v) for name, v in zip(CORRELATOR_NAMES, self.values)}


def json_number(value):
    if isinstance(value, Fraction):
        return int(value) if value.denominator == 1 else str(value)
    return float(value)


@dataclass(frozen=True)
class BellInequality:
    """Σ coefficients·correlators ≥ local_bound."""

    coefficients: tuple
    local_bound: Fraction | float | None = None
    name: str = ""

    def __post_init__(self):
        coefs = tuple(
            Fraction(c) if isinstance(c, (int, Fraction, np.integer)) else float(c)
            for c in self.coefficients
        )
        if len(coefs) != DIMENSION:
            raise InvalidStateError(
                f"an inequality has {DIMENSION} coefficients, got {len(coefs)}"
            )
        if not any(coefs):
            raise InvalidStateError("an inequality needs a nonzero coefficient")
        object.__setattr__(self, "coefficients", coefs)
        if isinstance(self.local_bound, (int, np.integer)):
            object.__setattr__(self, "local_bound", Fraction(int(self.local_bound)))

    @property
    def exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.coefficients)

    def scaled(self) -> tuple[np.ndarray, int]:
        """Integer coefficient vector and the factor it was multiplied by."""
        if not self.exact:
            raise InvalidStateError("inequality has non-rational coefficients")
        scale = np.lcm.reduce([c.denominator for c in self.coefficients])
        return (
            np.array([int(c * scale) for c in self.coefficients], dtype=np.int64),
            int(scale),
        )

    def __add__(self, other: "BellInequality") -> "BellInequality":
        bound = None
        if self.local_bound is not None and other.local_bound is not None:
            bound = self.local_bound + other.local_bound
        return BellInequality(
            tuple(a + b for a, b in zip(self.coefficients, other.coefficients)),
            bound,
            f"{self.name}+{other.name}" if self.name and other.name else "",
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "coefficients": {
                name: json_number(c)
                for name, c in zip(CORRELATOR_NAMES, self.coefficients)
            },
            "local_bound": None
            if self.local_bound is None
            else json_number(self.local_bound),
        }


def evaluate(ineq: BellInequality, b: Behavior):
    return sum(c * e for c, e in zip(ineq.coefficients, b.values))


def _tile_vector(s1: int, s2: int, s3: int | None) -> list[int]:
    vec = [val(s1, 0), val(s1, 1)]
    vec += [val(s1, x) * val(s2, y) for x, y in INPUT_PAIRS]
    if s3 is not None:
        vec += [val(s1, x) * val(s3, y) for x, y in INPUT_PAIRS]
    return vec


def _edge_vectors(window: int) -> np.ndarray:
    if window == 3:
        rows = [_tile_vector(s1, s2, s3) for s1, s2, s3 in product(STRATEGIES, repeat=3)]
    elif window == 2:
        rows = [_tile_vector(s1, s2, None) for s1, s2 in product(STRATEGIES, repeat=2)]
    else:
        raise InvalidStateError(f"window must be 2 or 3, got {window}")
    return np.array(rows, dtype=np.int64)


@lru_cache(maxsize=4)
def vertex_table(window: int = 3) -> np.ndarray:
    """
    Distinct vertex behaviors as rows of integer numerators.

    Window 3 gives all ten correlators; window 2 gives the nearest-neighbour
    projection (E0, E1, E12_xy).
    """
    edges = _edge_vectors(window)
    denominator = env.behavior_denominator
    seen: set[tuple[int, ...]] = set()
    cycles = 0
    for codes in iter_simple_cycles(len(STRATEGIES), window):
        total = edges[codes].sum(axis=0) * (denominator // len(codes))
        seen.add(tuple(total.tolist()))
        cycles += 1
    table = np.array(sorted(seen), dtype=np.int64)
    table.flags.writeable = False
    logger.info(
        f"Window-{window} polytope: {cycles} loops, {len(table)} distinct vertices"
    )
    return table


def vertex_behaviors() -> list[Behavior]:
    denominator = env.behavior_denominator
    return [Behavior.from_scaled(row, denominator) for row in vertex_table(3)]


def vertex_rows(window: int = 3) -> list[dict]:
    """Vertices as ``{correlator: value}`` rows over the coordinates of ``window``."""
    table = vertex_table(window)
    names = CORRELATOR_NAMES[: table.shape[1]]
    denominator = env.behavior_denominator
    return [
        {name: json_number(Fraction(int(v), denominator)) for name, v in zip(names, row)}
        for row in table
    ]


def _vertex_values(ineq: BellInequality) -> tuple[np.ndarray, int]:
    """Values of the inequality on every vertex, scaled by the returned factor."""
    table = vertex_table(3)
    if ineq.exact:
        coefs, scale = ineq.scaled()
        return table @ coefs, scale * env.behavior_denominator
    coefs = np.array(ineq.coefficients, dtype=float)
    return table @ coefs, env.behavior_denominator


def local_bound(ineq: BellInequality):
    values, scale = _vertex_values(ineq)
    if ineq.exact:
        return Fraction(int(values.min()), scale)
    return float(values.min()) / scale


@lru_cache(maxsize=4)
def ambient_dim(window: int = 3) -> int:
    return affine_rank(vertex_table(window).tolist())


def verify_facet(ineq: BellInequality) -> FacetCheck:
    bound = ineq.local_bound if ineq.local_bound is not None else local_bound(ineq)
    values, scale = _vertex_values(ineq)
    table = vertex_table(3)
    if ineq.exact:
        target = Fraction(bound) * scale
        if target.denominator != 1:
            valid = bool(np.all(values > target))
            saturating = np.zeros(len(values), dtype=bool)
        else:
            valid = bool(np.all(values >= int(target)))
            saturating = values == int(target)
    else:
        target = float(bound) * scale
        tol = env.LP_CERTIFICATE_TOL * scale
        valid = bool(np.all(values >= target - tol))
        saturating = np.abs(values - target) <= tol

    tight = bool(saturating.any())
    face_dim = affine_rank(table[saturating].tolist()) if tight else -1
    return FacetCheck(
        valid=valid, tight=tight, face_dim=face_dim, ambient_dim=ambient_dim(3)
    )


def enumerate_facets(
    vertices: np.ndarray | None = None,
    dims: Sequence[int] | None = None,
    denominator: int | None = None,
) -> list[BellInequality]:
    """
    Facets of the hull of ``vertices`` projected onto the coordinates ``dims``.

    Returned inequalities live in the full ten-correlator space with zeros on
    the dropped coordinates; their bounds are exact.
    """
    table = vertex_table(3) if vertices is None else np.asarray(vertices)
    denominator = env.behavior_denominator if denominator is None else denominator
    dims = list(range(table.shape[1])) if dims is None else list(dims)
    projected = np.unique(table[:, dims], axis=0)

    facets = []
    for coefs, bound in double_description(projected, denominator):
        full = [0] * DIMENSION
        for d, c in zip(dims, coefs):
            full[d] = c
        facets.append(BellInequality(tuple(full), Fraction(bound)))
    record_facets(len(facets))
    return facets


# input swap x -> 1-x at every site
_SWAP = ((1, 0, 5, 4, 3, 2, 9, 8, 7, 6), (1,) * DIMENSION)
# output flip for input 0 at every site
_FLIP0 = (tuple(range(DIMENSION)), (-1, 1, 1, -1, -1, 1, 1, -1, -1, 1))
# output flip for input 1 at every site
_FLIP1 = (tuple(range(DIMENSION)), (1, -1, 1, -1, -1, 1, 1, -1, -1, 1))
# chain reflection: E^{1,j}_{xy} <-> E^{1,j}_{yx}
_REFLECT = ((0, 1, 2, 4, 3, 5, 6, 8, 7, 9), (1,) * DIMENSION)

GENERATORS = (_SWAP, _FLIP0, _FLIP1, _REFLECT)


def _apply(g, values: Sequence) -> tuple:
    perm, signs = g
    return tuple(s * values[p] for p, s in zip(perm, signs))


def _compose(g, h):
    """(g ∘ h)(v) = g(h(v))."""
    perm_g, signs_g = g
    perm_h, signs_h = h
    perm = tuple(perm_h[p] for p in perm_g)
    signs = tuple(sg * signs_h[p] for p, sg in zip(perm_g, signs_g))
    return perm, signs


@lru_cache(maxsize=1)
def symmetry_group() -> tuple:
    identity = (tuple(range(DIMENSION)), (1,) * DIMENSION)
    group = {identity}
    frontier = [identity]
    while frontier:
        g = frontier.pop()
        for gen in GENERATORS:
            h = _compose(gen, g)
            if h not in group:
                group.add(h)
                frontier.append(h)
    return tuple(sorted(group))


def transform(ineq: BellInequality, g) -> BellInequality:
    return BellInequality(_apply(g, ineq.coefficients), ineq.local_bound, ineq.name)


def canonical_form(ineq: BellInequality) -> tuple:
    return min(_apply(g, ineq.coefficients) for g in symmetry_group())


def symmetry_classes(ineqs: Iterable[BellInequality]) -> list[list[BellInequality]]:
    """Orbits under relabellings and reflection, in order of first appearance."""
    classes: dict[tuple, list[BellInequality]] = {}
    for ineq in ineqs:
        classes.setdefault(canonical_form(ineq), []).append(ineq)
    return list(classes.values())


@dataclass(frozen=True, eq=False)
class TripartiteBox:
    """P(a1, a2, a3 | x1, x2, x3) as an array indexed [a1, a2, a3, x1, x2, x3]."""

    probs: np.ndarray

    def __post_init__(self):
        P = np.array(self.probs, dtype=float, copy=True)
        if P.shape != (2,) * 6:
            raise InvalidStateError(f"box must have shape (2,)*6, got {P.shape}")
        tol = env.VALIDITY_TOL
        if P.min() < -tol:
            raise InvalidStateError("box has negative probabilities")
        if np.any(np.abs(P.sum(axis=(0, 1, 2)) - 1) > tol):
            raise InvalidStateError("box is not normalized for every input")
        if not _is_nonsignaling(P, tol):
            raise InvalidStateError("box is signaling")
        P.flags.writeable = False
        object.__setattr__(self, "probs", P)

    @classmethod
    def deterministic(cls, s1: int, s2: int, s3: int) -> "TripartiteBox":
        P = np.zeros((2,) * 6)
        for x1, x2, x3 in product((0, 1), repeat=3):
            P[response(s1, x1), response(s2, x2), response(s3, x3), x1, x2, x3] = 1
        return cls(P)

    @classmethod
    def white_noise(cls) -> "TripartiteBox":
        return cls(np.full((2,) * 6, 1 / 8))

    @classmethod
    def from_pair(cls, correlators, marginals=(0.0, 0.0)) -> "TripartiteBox":
        """
        Sites 1 and 2 share a box with the given 2x2 correlators and unbiased
        outputs; site 3 is uniform and independent.
        """
        E = np.asarray(correlators, dtype=float)
        P = np.zeros((2,) * 6)
        for a1, a2, a3, x1, x2, x3 in product((0, 1), repeat=6):
            s = (-1) ** (a1 + a2)
            P[a1, a2, a3, x1, x2, x3] = (
                1 + (-1) ** a1 * marginals[0] + (-1) ** a2 * marginals[1] + s * E[x1, x2]
            ) / 8
        return cls(P)


def _is_nonsignaling(P: np.ndarray, tol: float) -> bool:
    # summing out one party must leave a marginal independent of that party's input
    for party in range(3):
        reduced = P.sum(axis=party)
        if np.any(np.ptp(reduced, axis=2 + party) > tol):
            return False
    return True


def _deterministic_tripartite() -> list[tuple[int, int, int]]:
    return list(product(STRATEGIES, repeat=3))


def _local_tripartite_bound(ineq: BellInequality, strategies) -> Fraction:
    cost = [
        sum(
            (c * e for c, e in zip(ineq.coefficients, _tile_vector(*t))),
            Fraction(0),
        )
        for t in strategies
    ]
    return solve_exact(cost, [[1] * len(strategies)], [1]).value


def _shifted(subset: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(i - subset[0] for i in subset)


@lru_cache(maxsize=4)
def _window_columns(window: int) -> dict[tuple, int]:
    """
    Column of each correlator E_S(x_S) of a TI nonsignaling window.

    Subsets are kept up to translation, so every key starts at site 0.
    """
    columns = {}
    for size in range(1, window + 1):
        for rest in combinations(range(1, window), size - 1):
            subset = (0, *rest)
            for inputs in product((0, 1), repeat=size):
                columns[(subset, inputs)] = len(columns)
    return columns


@lru_cache(maxsize=4)
def _window_positivity(window: int) -> csr_matrix:
    # -Σ_S Π_{i∈S} (-1)^{a_i} E_S(x_S) <= 1 for every (a, x), E_∅ = 1
    columns = _window_columns(window)
    subsets = [
        s for size in range(1, window + 1) for s in combinations(range(window), size)
    ]
    rows, cols, data = [], [], []
    for r, (x, a) in enumerate(
        product(product((0, 1), repeat=window), product((0, 1), repeat=window))
    ):
        for s in subsets:
            rows.append(r)
            cols.append(columns[(_shifted(s), tuple(x[i] for i in s))])
            data.append(-((-1) ** sum(a[i] for i in s)))
    shape = (4**window, len(columns))
    return coo_matrix((data, (rows, cols)), shape=shape).tocsr()


def tripartite_local_bound(
    ineq: BellInequality, ti_constraint: bool = True, window: int | None = None
):
    """
    Minimum of ``ineq`` over tripartite-local boxes P123.

    Without ``ti_constraint`` any mixture of the 64 deterministic triples is
    allowed and the minimum is exact. With it, P123 must also be the marginal
    of a translation-invariant nonsignaling box on ``window`` consecutive
    sites: the window's full correlators E_S(x_S) depend on S only up to
    translation, its probabilities are nonnegative, and the correlators over
    subsets of the first three sites equal those of the local mixture. Window
    3 reduces to P12 = P23; longer windows shrink the relaxation toward boxes
    that extend to the whole chain.
    """
    if not ineq.exact:
        raise InvalidStateError("tripartite bounds need rational coefficients")
    strategies = _deterministic_tripartite()
    try:
        if not ti_constraint:
            return _local_tripartite_bound(ineq, strategies)
        window = env.GENUINE_WINDOW if window is None else window
        if window < 3:
            raise InvalidStateError(f"extension window must cover three sites, got {window}")
        return _ti_tripartite_bound(ineq, strategies, window)
    except LPError:
        logger.error(f"Tripartite LP failed for {ineq.name or 'inequality'}")
        raise


def _ti_tripartite_bound(ineq: BellInequality, strategies, window: int) -> float:
    columns = _window_columns(window)
    n_corr, n_mix = len(columns), len(strategies)
    cost = np.zeros(n_corr + n_mix)
    cost[n_corr:] = [
        float(sum(c * e for c, e in zip(ineq.coefficients, _tile_vector(*t))))
        for t in strategies
    ]

    A_eq, b_eq = [], []
    for size in (1, 2, 3):
        for subset in combinations(range(3), size):
            for inputs in product((0, 1), repeat=size):
                row = np.zeros(n_corr + n_mix)
                row[columns[(_shifted(subset), inputs)]] = 1.0
                row[n_corr:] = [
                    -np.prod([val(t[i], x) for i, x in zip(subset, inputs)])
                    for t in strategies
                ]
                A_eq.append(row)
                b_eq.append(0.0)
    normalisation = np.zeros(n_corr + n_mix)
    normalisation[n_corr:] = 1.0
    A_eq.append(normalisation)
    b_eq.append(1.0)

    positivity = _window_positivity(window)
    A_ub = hstack([positivity, csr_matrix((positivity.shape[0], n_mix))]).tocsr()
    b_ub = np.ones(positivity.shape[0])
    bounds = [(-1.0, 1.0)] * n_corr + [(0.0, None)] * n_mix
    logger.debug(
        f"TI tripartite LP for {ineq.name or 'inequality'}: window={window}, "
        f"columns={n_corr + n_mix}, positivity rows={positivity.shape[0]}"
    )
    result = solve_highs(cost, A_eq, b_eq, A_ub=A_ub, b_ub=b_ub, bounds=bounds)
    return result.value


def genuine_ti_violation_gap(ineq: BellInequality, window: int | None = None):
    bound = ineq.local_bound if ineq.local_bound is not None else local_bound(ineq)
    return bound - tripartite_local_bound(ineq, ti_constraint=True, window=window)


def is_tripartite_local(box: TripartiteBox) -> bool:
    points = [
        TripartiteBox.deterministic(*t).probs.ravel()
        for t in _deterministic_tripartite()
    ]
    return convex_membership(np.array(points), box.probs.ravel())


def read_inequalities(source: str | Path) -> list[BellInequality]:
    """
    One inequality per line: ten coefficients in ``CORRELATOR_NAMES`` order and
    the local bound. ``#`` starts a comment.
    """
    text = Path(source).read_text() if isinstance(source, Path) else source
    ineqs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != DIMENSION + 1:
            raise InputFormatError(
                f"line {lineno}: expected {DIMENSION + 1} numbers, got {len(fields)}"
            )
        try:
            numbers = [Fraction(f) for f in fields]
        except ValueError:
            raise InputFormatError(f"line {lineno}: not a number in {line!r}")
        ineqs.append(
            BellInequality(tuple(numbers[:DIMENSION]), numbers[DIMENSION], f"line{lineno}")
        )
    return ineqs


def format_inequalities(ineqs: Iterable[BellInequality]) -> str:
    lines = ["# " + " ".join(CORRELATOR_NAMES) + " L"]
    for ineq in ineqs:
        fields = [str(c) for c in ineq.coefficients]
        fields.append("" if ineq.local_bound is None else str(ineq.local_bound))
        lines.append(" ".join(fields).rstrip())
    return "\n".join(lines) + "\n"


def lift_to_distribution(loop_codes: Sequence[int]) -> JointDistribution:
    """Three-site strategy distribution of a loop given by tile codes."""
    table = np.zeros((len(STRATEGIES),) * 3)
    for code in loop_codes:
        table[np.unravel_index(code, table.shape)] += 1 / len(loop_codes)
    return JointDistribution(len(STRATEGIES), 3, table)
