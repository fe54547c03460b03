from prometheus_client import REGISTRY, write_to_textfile

from tichain.core.config import env
from tichain.core.prometheus_metrics import (
    FailureReason,
    LPEngine,
    PrometheusResult,
    SeesawStep,
    metrics,
)


def record_enumeration(d: int, n: int, loop_count: int, elapsed_seconds: float) -> None:
    metrics.loops_enumerated_total.labels(d=str(d), n=str(n)).inc(loop_count)
    metrics.loops_per_enumeration.observe(loop_count)
    metrics.enumeration_latency.observe(elapsed_seconds)


def record_lp_solve(
    engine: LPEngine, result: PrometheusResult, elapsed_seconds: float
) -> None:
    metrics.lp_solves_total.labels(engine=engine, result=result).inc()
    metrics.lp_latency.labels(engine=engine).observe(elapsed_seconds)


def record_facets(count: int) -> None:
    metrics.facets_enumerated_total.inc(count)


def record_eigensolve(
    ring_size: int, result: PrometheusResult, elapsed_seconds: float
) -> None:
    metrics.eigensolves_total.labels(ring_size=str(ring_size), result=result).inc()
    metrics.eigensolve_latency.labels(ring_size=str(ring_size)).observe(
        elapsed_seconds
    )


def record_seesaw_half_step(step: SeesawStep) -> None:
    metrics.seesaw_half_steps_total.labels(step=step).inc()


def record_command_failure(command: str, reason: FailureReason) -> None:
    metrics.command_failures_total.labels(command=command, reason=reason).inc()


def flush_metrics(path: str | None = None) -> bool:
    """Write the default registry to a node-exporter textfile if one is configured."""
    target = path or env.METRICS_FILE
    if not target:
        return False
    write_to_textfile(target, REGISTRY)
    return True
