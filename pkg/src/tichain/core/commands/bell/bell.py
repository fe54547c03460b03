from pathlib import Path

import typer

from tichain.core.config import CORRELATOR_NAMES, env
from tichain.core.polytope import (
    BellInequality,
    ambient_dim,
    enumerate_facets,
    format_inequalities,
    json_number,
    local_bound,
    symmetry_classes,
    tripartite_local_bound,
    verify_facet,
    vertex_rows,
    vertex_table,
)
from tichain.core.tables import TABLE2, select_inequalities
from tichain.core.utils import (
    emit,
    fan_out,
    first_set,
    parse_int_list,
    reporting,
    state_of,
    verdict,
)

app = typer.Typer(help="The classical TI Bell polytope of nearest and next-to-nearest neighbours.")

NEAREST_NEIGHBOUR_DIMS = "0,1,2,3,4,5"

_ID = typer.Option(None, "--id", help="Builtin inequality id (1-11)")
_FILE = typer.Option(None, "--file", help="Inequality file, one per line")
_TABLE1 = typer.Option(False, "--table1", help="All builtin inequalities")


def _label(row_id: int | None, ineq: BellInequality) -> str:
    return str(row_id) if row_id is not None else ineq.name


@app.command("vertices")
def vertices(
    ctx: typer.Context,
    window: int = typer.Option(3, "--window", help="2: nearest neighbours only; 3: both"),
    listing: bool = typer.Option(False, "--list", help="List every vertex behavior"),
) -> None:
    """
    Vertices of the classical TI polytope from the simple cycles of the de Bruijn graph.
    """
    with reporting("bell vertices"):
        table = vertex_table(window)
        if listing:
            emit(ctx, "bell vertices", vertex_rows(window))
            return
        emit(
            ctx,
            "bell vertices",
            {
                "window": window,
                "vertices": len(table),
                "ambient_dim": ambient_dim(window),
                "denominator": env.behavior_denominator,
            },
        )


@app.command("bound")
def bound(
    ctx: typer.Context,
    row_id: int | None = _ID,
    file: Path | None = _FILE,
    table1: bool = _TABLE1,
) -> None:
    """
    Exact local bounds; builtin rows are compared against their tabulated bound.
    """
    with reporting("bell bound"):
        rows = []
        for rid, ineq in select_inequalities(row_id, file, table1):
            value = local_bound(ineq)
            row = {"id": _label(rid, ineq), "local_bound": json_number(value)}
            if ineq.local_bound is not None:
                row["stated_bound"] = json_number(ineq.local_bound)
                row["matches"] = value == ineq.local_bound
            rows.append(row)
        emit(ctx, "bell bound", rows)
        verdict(all(row.get("matches", True) for row in rows))


@app.command("verify")
def verify(
    ctx: typer.Context,
    row_id: int | None = _ID,
    file: Path | None = _FILE,
    table1: bool = _TABLE1,
) -> None:
    """
    Check validity, tightness and facet dimension; exits 1 unless every inequality is a facet.
    """
    with reporting("bell verify"):
        rows = []
        for rid, ineq in select_inequalities(row_id, file, table1):
            check = verify_facet(ineq)
            rows.append(
                {"id": _label(rid, ineq), **check.model_dump(), "facet": check.is_facet}
            )
        emit(ctx, "bell verify", rows)
        verdict(all(row["facet"] for row in rows))


@app.command("facets")
def facets(
    ctx: typer.Context,
    dims: str = typer.Option(
        NEAREST_NEIGHBOUR_DIMS,
        "--dims",
        help=f"Correlator coordinates to keep, 0-9 in order {','.join(CORRELATOR_NAMES)}",
    ),
    classes: bool = typer.Option(
        False, "--classes", help="Keep one representative per symmetry class"
    ),
    write: Path | None = typer.Option(
        None, "--write", help="Also write the facets in the inequality file format"
    ),
) -> None:
    """
    Facet enumeration of the projected polytope by double description.
    """
    with reporting("bell facets"):
        found = enumerate_facets(dims=parse_int_list(dims))
        if classes:
            orbits = symmetry_classes(found)
            found = [orbit[0] for orbit in orbits]
            sizes = [len(orbit) for orbit in orbits]
        else:
            sizes = [1] * len(found)
        if write is not None:
            write.write_text(format_inequalities(found))
        rows = [
            {"index": i, **ineq.to_dict(), "class_size": size}
            for i, (ineq, size) in enumerate(zip(found, sizes), start=1)
        ]
        emit(ctx, "bell facets", rows)


@app.command("genuine")
def genuine(
    ctx: typer.Context,
    row_id: int | None = _ID,
    file: Path | None = _FILE,
    table1: bool = _TABLE1,
    window: int | None = typer.Option(
        None, "--window", help="Sites of the nonsignaling TI extension (default GENUINE_WINDOW)"
    ),
) -> None:
    """
    Compare local bounds with the minimum over tripartite-local P123 that extend to a TI window.
    """
    with reporting("bell genuine"):
        state = state_of(ctx)
        tol = first_set(state.config.tolerance, default=env.GENUINE_GAP_TOL)
        selected = select_inequalities(row_id, file, table1)

        def assess(item):
            rid, ineq = item
            bound = local_bound(ineq)
            tripartite = tripartite_local_bound(ineq, window=window)
            gap = bound - tripartite
            row = {
                "id": _label(rid, ineq),
                "local_bound": json_number(bound),
                "tripartite_bound": json_number(tripartite),
                "gap": float(gap),
                "genuine": bool(gap > tol),
            }
            if rid in TABLE2:
                row["expected"] = TABLE2[rid].genuine
                row["matches"] = row["genuine"] == row["expected"]
            return row

        rows = fan_out(assess, selected)
        emit(ctx, "bell genuine", rows)
        verdict(all(row.get("matches", True) for row in rows))
