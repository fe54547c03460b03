import json
from pathlib import Path

import typer

from tichain.core.marginals import (
    JointDistribution,
    check_ti_consistency,
    decompose,
    enumerate_extreme_points,
    extend,
)
from tichain.core.utils import emit, first_set, reporting, state_of, verdict

app = typer.Typer(help="Classical TI marginals: consistency, extension and domino loops.")


def _read_distribution(path: Path) -> JointDistribution:
    return JointDistribution.from_dict(json.loads(path.read_text()))


def _tiles(tiles) -> list[str]:
    return ["".join(str(x) for x in t) for t in tiles]


@app.command("check")
def check(
    ctx: typer.Context,
    file: Path = typer.Argument(..., help="Distribution as a JSON table"),
    tol: float | None = typer.Option(None, "--tol", help="Marginal agreement tolerance"),
) -> None:
    """
    Report whether the window distribution extends to an infinite TI chain.
    """
    with reporting("marginal check"):
        P = _read_distribution(file)
        consistent = check_ti_consistency(
            P, first_set(tol, state_of(ctx).config.tolerance, default=None)
        )
        emit(ctx, "marginal check", {"d": P.d, "n": P.n, "consistent": consistent})
        verdict(consistent)


@app.command("extend")
def extend_distribution(
    ctx: typer.Context,
    file: Path = typer.Argument(..., help="Distribution as a JSON table"),
    sites: int = typer.Option(..., "--sites", "-s", help="Target window size"),
) -> None:
    """
    Extend a TI-consistent distribution to a larger window.
    """
    with reporting("marginal extend"):
        Q = extend(_read_distribution(file), sites)
        emit(ctx, "marginal extend", Q.to_dict())


@app.command("extremes")
def extremes(
    ctx: typer.Context,
    d: int = typer.Option(..., "--d", help="Alphabet size"),
    n: int = typer.Option(..., "--n", help="Window size"),
) -> None:
    """
    List the irreducible domino loops over {0..d-1}^n.
    """
    with reporting("marginal extremes"):
        loops = enumerate_extreme_points(d, n)
        rows = [
            {"index": i, "length": len(loop), "tiles": _tiles(loop.tiles)}
            for i, loop in enumerate(loops)
        ]
        emit(ctx, "marginal extremes", rows)


@app.command("decompose")
def decompose_distribution(
    ctx: typer.Context,
    file: Path = typer.Argument(..., help="Distribution as a JSON table"),
) -> None:
    """
    Write a TI-consistent distribution as a mixture of domino-loop distributions.
    """
    with reporting("marginal decompose"):
        P = _read_distribution(file)
        result = decompose(P)
        error = float(abs(result.recombine(P.d, P.n) - P.probs).max())
        rows = [
            {"weight": weight, "length": len(loop), "tiles": _tiles(loop.tiles)}
            for weight, loop in result.terms
        ]
        emit(
            ctx,
            "marginal decompose",
            {"terms": rows, "total_weight": result.total_weight, "max_error": error},
        )
