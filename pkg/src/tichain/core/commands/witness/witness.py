import numpy as np
import typer

from tichain.core.config import env
from tichain.core.errors import InputFormatError
from tichain.core.utils import emit, first_set, reporting, state_of, verdict
from tichain.core.witnesses import (
    evaluate_witness,
    min_pt_eigenvalue,
    ppt_threshold,
    ppt_threshold_closed_form,
    rho0_tis,
    rho1_nn,
    rho_lambda,
    separable_counterexample,
    ti_bound_for,
    ti_sigma_yx_max,
    witness_from_label,
    wt_bound,
    wt_bound_finite,
)

app = typer.Typer(help="Two-site witnesses for TI separable and TI chains.")

NAMED_STATES = {
    "rho1": rho1_nn,
    "rho0": rho0_tis,
    "separable": separable_counterexample,
}


@app.command("bound")
def bound(
    ctx: typer.Context,
    label: str = typer.Option(
        "yx", "--T", help='Witness: "yx", "-xy", ... or nine comma-separated entries'
    ),
    loop: int | None = typer.Option(
        None, "--loop", help="Also bound loops of this many product states"
    ),
    ring: int | None = typer.Option(
        None, "--ring", help="Also report the σy⊗σx maximum on a ring of 2m+1 sites"
    ),
) -> None:
    """
    Upper bound on tr(ρ₁₂W) over states with a TI separable extension.
    """
    with reporting("witness bound"):
        state = state_of(ctx)
        w = witness_from_label(label)
        grid = first_set(state.config.theta_grid, default=env.THETA_GRID)
        result = {
            "witness": w.name,
            "tis_bound": wt_bound(w.T, grid),
            "ti_bound": ti_bound_for(w.T),
        }
        if loop is not None:
            result["loop_bound"] = wt_bound_finite(w.T, loop)
        if ring is not None:
            result["ring_sigma_yx_max"] = ti_sigma_yx_max(ring)
        emit(ctx, "witness bound", result)


@app.command("family")
def family(
    ctx: typer.Context,
    threshold: bool = typer.Option(
        False, "--threshold", help="Only report the PPT threshold of ρ^λ"
    ),
    points: int = typer.Option(11, "--points", help="Number of λ values in [0, 1]"),
) -> None:
    """
    Sweep ρ^λ = λρ¹ + (1-λ)ρ⁰ against the σy⊗σx witness.
    """
    with reporting("witness family"):
        if threshold:
            emit(
                ctx,
                "witness family",
                {
                    "ppt_threshold": ppt_threshold(),
                    "closed_form": ppt_threshold_closed_form(),
                },
            )
            return
        if points < 2:
            raise InputFormatError("--points needs at least two values")
        state = state_of(ctx)
        grid = first_set(state.config.theta_grid, default=env.THETA_GRID)
        w = witness_from_label("yx")
        rows = []
        for lam in np.linspace(0.0, 1.0, points):
            rho = rho_lambda(float(lam))
            report = evaluate_witness(rho, w, grid)
            rows.append(
                {
                    "lambda": float(lam),
                    "value": report.value,
                    "violation": report.violation,
                    "ppt": report.ppt,
                    "min_pt_eigenvalue": min_pt_eigenvalue(rho),
                }
            )
        emit(ctx, "witness family", rows)


@app.command("report")
def report(
    ctx: typer.Context,
    lam: float | None = typer.Option(None, "--lambda", help="Mixing weight of ρ¹"),
    named: str | None = typer.Option(
        None, "--state", help=f"Named state: {', '.join(NAMED_STATES)}"
    ),
    label: str = typer.Option("yx", "--T", help="Witness label or matrix"),
) -> None:
    """
    Full witness report for one two-site state; exits 1 when nothing is detected.
    """
    with reporting("witness report"):
        if (lam is None) == (named is None):
            raise InputFormatError("give exactly one of --lambda and --state")
        if named is not None:
            if named not in NAMED_STATES:
                raise InputFormatError(f"unknown state {named!r}")
            rho = NAMED_STATES[named]()
        else:
            rho = rho_lambda(lam)
        state = state_of(ctx)
        grid = first_set(state.config.theta_grid, default=env.THETA_GRID)
        result = evaluate_witness(rho, witness_from_label(label), grid)
        emit(ctx, "witness report", result.model_dump())
        verdict(result.violation > env.VIOLATION_TOL)
