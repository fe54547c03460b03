"""
Exact facet enumeration of a full-dimensional polytope given by its vertices.

The valid inequalities a·x + s ≥ 0 of conv{x_k} form the cone {y : M y ≥ 0}
whose rows are the homogenized vertices (x_k, 1). Its extreme rays are the
facets plus the trivial ray (0, 1). They are computed with the double
description method: start from the simplicial cone of D+1 independent rows,
then insert the remaining rows one at a time, combining adjacent ray pairs
that straddle the new hyperplane. Adjacency is decided combinatorially from
zero sets, kept as integer bitmasks. All arithmetic is on Python integers.
"""

import math
from collections.abc import Sequence
from fractions import Fraction

import numpy as np

from tichain.core.config import env
from tichain.core.errors import CapExceededError, InvalidStateError
from tichain.core.logger import logger

Facet = tuple[tuple[int, ...], int]


def _normalize(vector: Sequence[int]) -> tuple[int, ...]:
    g = math.gcd(*vector)
    if g == 0:
        return tuple(vector)
    return tuple(v // g for v in vector)


def _dot(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


def exact_rank(rows: Sequence[Sequence[int]], limit: int | None = None) -> int:
    """Rank over the rationals by fraction-free elimination; stops early at ``limit``."""
    basis: list[tuple[int, list[int]]] = []
    for row in rows:
        v = [int(x) for x in row]
        for pivot, b in basis:
            if v[pivot]:
                v = [b[pivot] * x - v[pivot] * y for x, y in zip(v, b)]
        lead = next((i for i, x in enumerate(v) if x), None)
        if lead is None:
            continue
        basis.append((lead, list(_normalize(v))))
        if limit is not None and len(basis) >= limit:
            break
    return len(basis)


def affine_rank(points: Sequence[Sequence[int]]) -> int:
    """Dimension of the affine hull of integer points (-1 for none)."""
    if len(points) == 0:
        return -1
    origin = [int(x) for x in points[0]]
    return exact_rank([[int(x) - o for x, o in zip(p, origin)] for p in points[1:]])


def _independent_rows(M: list[list[int]], size: int) -> list[int]:
    chosen: list[int] = []
    basis: list[tuple[int, list[int]]] = []
    for idx, row in enumerate(M):
        v = list(row)
        for pivot, b in basis:
            if v[pivot]:
                v = [b[pivot] * x - v[pivot] * y for x, y in zip(v, b)]
        lead = next((i for i, x in enumerate(v) if x), None)
        if lead is None:
            continue
        basis.append((lead, list(_normalize(v))))
        chosen.append(idx)
        if len(chosen) == size:
            break
    return chosen


def _initial_rays(M: list[list[int]], rows: list[int]) -> list[tuple[int, ...]]:
    """Columns of the inverse of the chosen square submatrix, as integer rays."""
    size = len(rows)
    aug = [
        [Fraction(x) for x in M[r]] + [Fraction(int(i == j)) for j in range(size)]
        for i, r in enumerate(rows)
    ]
    for col in range(size):
        pivot = next(i for i in range(col, size) if aug[i][col] != 0)
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for i in range(size):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[col])]
    rays = []
    for j in range(size):
        column = [aug[i][size + j] for i in range(size)]
        scale = math.lcm(*(x.denominator for x in column))
        rays.append(_normalize([int(x * scale) for x in column]))
    return rays


def double_description(points, denominator: int = 1) -> list[Facet]:
    """
    Facets of conv(points / denominator) as (a, b) meaning a·x ≥ b.

    ``points`` is an integer array of shape (k, D). Each facet has coprime integer
    entries; the list is sorted.
    """
    P = [[int(x) for x in row] for row in np.asarray(points)]
    if not P:
        raise InvalidStateError("no points given")
    k, D = len(P), len(P[0])
    if k * D > env.DD_BUDGET:
        raise CapExceededError(
            f"{k} points in dimension {D} exceed the double description budget "
            f"{env.DD_BUDGET}"
        )
    M = [row + [int(denominator)] for row in P]
    size = D + 1
    start = _independent_rows(M, size)
    if len(start) < size:
        raise InvalidStateError(
            f"points span an affine space of dimension {len(start) - 1} < {D}"
        )

    rays = _initial_rays(M, start)
    zeros = []
    for ray in rays:
        mask = 0
        for idx in start:
            if _dot(M[idx], ray) == 0:
                mask |= 1 << idx
        zeros.append(mask)

    chosen = set(start)
    for j in range(k):
        if j in chosen:
            continue
        row = M[j]
        values = [_dot(row, ray) for ray in rays]
        pos = [i for i, v in enumerate(values) if v > 0]
        neg = [i for i, v in enumerate(values) if v < 0]
        if not neg:
            for i, v in enumerate(values):
                if v == 0:
                    zeros[i] |= 1 << j
            chosen.add(j)
            continue

        new_rays, new_zeros = [], []
        for p in pos:
            for q in neg:
                common = zeros[p] & zeros[q]
                if common.bit_count() < size - 2:
                    continue
                if any(
                    r != p and r != q and (zeros[r] & common) == common
                    for r in range(len(rays))
                ):
                    continue
                combined = [
                    values[p] * b - values[q] * a for a, b in zip(rays[p], rays[q])
                ]
                new_rays.append(_normalize(combined))
                new_zeros.append(common | (1 << j))

        kept = [i for i, v in enumerate(values) if v >= 0]
        rays = [rays[i] for i in kept] + new_rays
        zeros = [
            zeros[i] | (1 << j) if values[i] == 0 else zeros[i] for i in kept
        ] + new_zeros
        chosen.add(j)
        logger.debug(f"DD inserted row {j}: {len(rays)} rays")

    facets = sorted(
        {(tuple(ray[:D]), -ray[D]) for ray in rays if any(ray[:D])}
    )
    logger.debug(f"Double description found {len(facets)} facets for {k} points")
    return facets
