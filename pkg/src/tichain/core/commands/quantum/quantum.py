from pathlib import Path

import typer

from tichain.core.config import env
from tichain.core.errors import InputFormatError
from tichain.core.polytope import local_bound
from tichain.core.quantum_eval import DEFAULT_RINGS, MeasurementPair, quantum_value
from tichain.core.seesaw import seesaw as run_seesaw
from tichain.core.tables import TABLE1, TABLE2, quantum_row, select_inequalities
from tichain.core.utils import (
    emit,
    fan_out,
    first_set,
    parse_int_list,
    reporting,
    state_of,
    verdict,
)

app = typer.Typer(help="Quantum values from ground states of 3-local ring Hamiltonians.")

_ID = typer.Option(None, "--id", help="Builtin inequality id (1-11)")
_FILE = typer.Option(None, "--file", help="Inequality file; the first line is used")
_RINGS = typer.Option(None, "--rings", help="Ring sizes, e.g. 6,9")
_EXTRAPOLATION = typer.Option(
    None, "--extrapolation", help="commensurate or inverse-n (default EXTRAPOLATION)"
)


def _rings(ctx: typer.Context, rings: str | None) -> list[int]:
    if rings is not None:
        return parse_int_list(rings)
    return list(first_set(state_of(ctx).config.rings, default=list(DEFAULT_RINGS)))


def _angles(
    row_id: int | None, theta: float | None, phi: float | None
) -> MeasurementPair:
    if theta is not None and phi is not None:
        return MeasurementPair(theta, phi)
    if row_id is None or (theta is None) != (phi is None):
        raise InputFormatError("give --theta and --phi, or a builtin --id for its angles")
    row = quantum_row(row_id)
    return MeasurementPair(row.theta, row.phi)


@app.command("value")
def value(
    ctx: typer.Context,
    row_id: int | None = _ID,
    file: Path | None = _FILE,
    theta: float | None = typer.Option(None, "--theta", help="Angle of the first A1 block"),
    phi: float | None = typer.Option(None, "--phi", help="Angle of the second A1 block"),
    rings: str | None = _RINGS,
    extrapolation: str | None = _EXTRAPOLATION,
) -> None:
    """
    Ground energy per site on periodic rings and its infinite-chain estimate; exits 1 without a violation.
    """
    with reporting("quantum value"):
        rid, ineq = select_inequalities(row_id, file)[0]
        mp = _angles(rid, theta, phi)
        result = quantum_value(ineq, mp, _rings(ctx, rings), extrapolation)
        bound = local_bound(ineq)
        margin = first_set(state_of(ctx).config.tolerance, default=env.VIOLATION_TOL)
        violated = result.extrapolated < float(bound) - margin
        emit(
            ctx,
            "quantum value",
            {
                "id": rid,
                "theta": mp.theta,
                "phi": mp.phi,
                **result.model_dump(),
                "local_bound": float(bound),
                "violation": violated,
            },
        )
        verdict(violated)


@app.command("seesaw")
def seesaw(
    ctx: typer.Context,
    row_id: int | None = _ID,
    file: Path | None = _FILE,
    register_size: int | None = typer.Option(
        None, "--m", "--register-size", help="Length of the register loop (>= 3)"
    ),
    ring_size: int | None = typer.Option(
        None, "--N", "--ring-size", help="Ring size of the state step"
    ),
    max_iters: int | None = typer.Option(None, "--max-iters", help="Iteration budget"),
    seed: int | None = typer.Option(None, "--seed", help="Seed of the random start"),
    from_table: bool = typer.Option(
        False, "--from-table", help="Start from the tabulated angles instead of at random"
    ),
) -> None:
    """
    Alternate ring ground states and optimal dichotomic measurements.
    """
    with reporting("quantum seesaw"):
        config = state_of(ctx).config
        rid, ineq = select_inequalities(row_id, file)[0]
        initial = None
        if from_table:
            row = quantum_row(rid) if rid is not None else None
            if row is None:
                raise InputFormatError("--from-table needs a builtin --id")
            initial = MeasurementPair(row.theta, row.phi)
        result, _ = run_seesaw(
            ineq,
            m=first_set(register_size, config.register_size, default=3),
            N=first_set(ring_size, config.ring_size, default=9),
            max_iters=first_set(max_iters, config.max_iters, default=env.SEESAW_MAX_ITERS),
            seed=first_set(seed, config.seed, default=0),
            initial=initial,
        )
        emit(
            ctx,
            "quantum seesaw",
            {"id": rid, **result.model_dump(), "local_bound": float(local_bound(ineq))},
        )


@app.command("table2")
def table2(
    ctx: typer.Context,
    rings: str | None = _RINGS,
    extrapolation: str | None = _EXTRAPOLATION,
) -> None:
    """
    Evaluate every builtin inequality at its tabulated angles.
    """
    with reporting("quantum table2"):
        sizes = _rings(ctx, rings)

        def evaluate_row(row_id: int) -> dict:
            row = TABLE2[row_id]
            ineq = TABLE1[row_id]
            result = quantum_value(
                ineq, MeasurementPair(row.theta, row.phi), sizes, extrapolation
            )
            bound = float(ineq.local_bound)
            return {
                "id": row_id,
                "theta": row.theta,
                "phi": row.phi,
                "local_bound": bound,
                "table_value": row.quantum_value,
                "extrapolated": result.extrapolated,
                "residual": result.residual,
                "difference": result.extrapolated - row.quantum_value,
                "violation": result.extrapolated < bound,
            }

        rows = fan_out(evaluate_row, sorted(TABLE2))
        emit(ctx, "quantum table2", rows)
        verdict(all(row["violation"] for row in rows))
