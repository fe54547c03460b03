"""
Linear programs in standard equality form: minimize c·x s.t. A x = b, x ≥ 0.

``solve_exact`` is a dense two-phase tableau simplex over ``Fraction`` with
Bland's rule, so it terminates and returns exact vertex optima. ``solve_highs``
hands the same program to scipy's HiGHS for inputs that are not rational.
Every optimum is re-checked against the original data before it is returned.
"""

import time
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from tichain.core.config import env
from tichain.core.errors import LPError
from tichain.core.logger import logger
from tichain.core.metrics import record_lp_solve
from tichain.core.prometheus_metrics import LPEngine, PrometheusResult

Number = int | Fraction | float


@dataclass
class LPResult:
    value: Fraction | float
    x: list
    engine: LPEngine
    pivots: int = 0


def _is_rational(values) -> bool:
    return all(
        isinstance(v, (int, Fraction, np.integer)) and not isinstance(v, bool)
        for v in values
    )


def _as_fraction_rows(A) -> list[list[Fraction]]:
    return [[Fraction(int(v)) if isinstance(v, np.integer) else Fraction(v) for v in row] for row in A]


def _pivot(rows: list[list[Fraction]], obj: list[Fraction], r: int, col: int) -> None:
    pivot = rows[r][col]
    rows[r] = [v / pivot for v in rows[r]]
    pivot_row = rows[r]
    for i, row in enumerate(rows):
        factor = row[col]
        if i != r and factor != 0:
            rows[i] = [a - factor * b for a, b in zip(row, pivot_row)]
    factor = obj[col]
    if factor != 0:
        obj[:] = [a - factor * b for a, b in zip(obj, pivot_row)]


def _iterate(rows, obj, basis, columns: Sequence[int]) -> tuple[str, int]:
    pivots = 0
    while True:
        col = next((j for j in columns if obj[j] < 0), None)
        if col is None:
            return "optimal", pivots
        best = None
        for i, row in enumerate(rows):
            if row[col] > 0:
                ratio = row[-1] / row[col]
                if (
                    best is None
                    or ratio < best[0]
                    or (ratio == best[0] and basis[i] < basis[best[1]])
                ):
                    best = (ratio, i)
        if best is None:
            return "unbounded", pivots
        r = best[1]
        _pivot(rows, obj, r, col)
        basis[r] = col
        pivots += 1


def solve_exact(c: Sequence[Number], A_eq, b_eq: Sequence[Number]) -> LPResult:
    started = time.perf_counter()
    try:
        result = _solve_exact(c, A_eq, b_eq)
    except LPError:
        record_lp_solve(
            LPEngine.EXACT, PrometheusResult.ERROR, time.perf_counter() - started
        )
        raise
    record_lp_solve(
        LPEngine.EXACT, PrometheusResult.SUCCESS, time.perf_counter() - started
    )
    return result


def _solve_exact(c, A_eq, b_eq) -> LPResult:
    cost = [Fraction(v) for v in c]
    A = _as_fraction_rows(A_eq)
    b = [Fraction(v) for v in b_eq]
    m, n = len(A), len(cost)
    if any(len(row) != n for row in A) or len(b) != m:
        raise LPError("constraint matrix does not match cost and right-hand side")

    # phase 1 on [A | I | b] with b ≥ 0
    rows = []
    for i in range(m):
        sign = -1 if b[i] < 0 else 1
        unit = [Fraction(0)] * m
        unit[i] = Fraction(1)
        rows.append([sign * a for a in A[i]] + unit + [sign * b[i]])
    basis = list(range(n, n + m))
    obj = [-sum((row[j] for row in rows), Fraction(0)) for j in range(n)]
    obj += [Fraction(0)] * m + [-sum((row[-1] for row in rows), Fraction(0))]

    status, pivots = _iterate(rows, obj, basis, range(n + m))
    if status != "optimal" or obj[-1] != 0:
        raise LPError(f"program is infeasible (phase-1 residual {-obj[-1]})")

    # drive zero-level artificials out of the basis, dropping redundant rows
    i = 0
    while i < len(rows):
        if basis[i] >= n:
            col = next((j for j in range(n) if rows[i][j] != 0), None)
            if col is None:
                del rows[i]
                del basis[i]
                continue
            _pivot(rows, obj, i, col)
            basis[i] = col
            pivots += 1
        i += 1

    rows = [row[:n] + [row[-1]] for row in rows]
    obj = list(cost) + [Fraction(0)]
    for i, row in enumerate(rows):
        weight = cost[basis[i]]
        if weight:
            obj = [a - weight * v for a, v in zip(obj, row)]

    status, more = _iterate(rows, obj, basis, range(n))
    pivots += more
    if status == "unbounded":
        raise LPError("program is unbounded")

    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        x[j] = rows[i][-1]
    value = -obj[-1]
    _certify_exact(cost, A, b, x, value)
    logger.debug(f"Exact simplex: {m} rows, {n} columns, {pivots} pivots")
    return LPResult(value=value, x=x, engine=LPEngine.EXACT, pivots=pivots)


def _certify_exact(cost, A, b, x, value) -> None:
    if any(v < 0 for v in x):
        raise LPError("certificate failed: negative primal entry")
    for row, rhs in zip(A, b):
        if sum((a * v for a, v in zip(row, x)), Fraction(0)) != rhs:
            raise LPError("certificate failed: equality constraint violated")
    if sum((a * v for a, v in zip(cost, x)), Fraction(0)) != value:
        raise LPError("certificate failed: objective mismatch")


def solve_highs(
    c, A_eq, b_eq, A_ub=None, b_ub=None, bounds=(0, None)
) -> LPResult:
    started = time.perf_counter()
    c = np.asarray(c, dtype=float)
    A_eq = np.asarray(A_eq, dtype=float)
    b_eq = np.asarray(b_eq, dtype=float)
    res = linprog(
        c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs"
    )
    elapsed = time.perf_counter() - started
    if res.status != 0:
        record_lp_solve(LPEngine.HIGHS, PrometheusResult.ERROR, elapsed)
        raise LPError(f"HiGHS failed: {res.message}")

    x = res.x
    tol = env.LP_CERTIFICATE_TOL
    residual = float(np.max(np.abs(A_eq @ x - b_eq))) if A_eq.size else 0.0
    lower = bounds[0] if isinstance(bounds, tuple) and bounds[0] is not None else None
    if residual > tol or (lower is not None and x.min() < lower - tol):
        record_lp_solve(LPEngine.HIGHS, PrometheusResult.ERROR, elapsed)
        raise LPError(f"certificate failed: equality residual {residual:.3e}")
    if abs(float(c @ x) - res.fun) > tol * max(1.0, abs(res.fun)):
        record_lp_solve(LPEngine.HIGHS, PrometheusResult.ERROR, elapsed)
        raise LPError("certificate failed: objective mismatch")

    record_lp_solve(LPEngine.HIGHS, PrometheusResult.SUCCESS, elapsed)
    return LPResult(value=float(res.fun), x=list(x), engine=LPEngine.HIGHS)


def minimize(c, A_eq, b_eq) -> LPResult:
    """Exact simplex when every coefficient is rational, HiGHS otherwise."""
    flat = list(c) + [v for row in A_eq for v in row] + list(b_eq)
    if _is_rational(flat):
        return solve_exact(c, A_eq, b_eq)
    return solve_highs(c, A_eq, b_eq)


def convex_membership(points, target, tol: float | None = None) -> bool:
    """
    True iff ``target`` lies in the convex hull of the rows of ``points``.

    Solved as min Σ(s⁺ + s⁻) s.t. Σ w_k p_k + s⁺ - s⁻ = target, Σ w = 1, all ≥ 0.
    """
    P = np.asarray(points, dtype=float)
    t = np.asarray(target, dtype=float)
    k, dim = P.shape
    eye = np.eye(dim)
    A_eq = np.vstack(
        [
            np.hstack([P.T, eye, -eye]),
            np.hstack([np.ones((1, k)), np.zeros((1, 2 * dim))]),
        ]
    )
    b_eq = np.concatenate([t, [1.0]])
    c = np.concatenate([np.zeros(k), np.ones(2 * dim)])
    result = solve_highs(c, A_eq, b_eq)
    threshold = env.MEMBERSHIP_TOL if tol is None else tol
    return float(result.value) <= threshold
