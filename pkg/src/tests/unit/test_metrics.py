from tichain.core.marginals import enumerate_extreme_points
from tichain.core.metrics import (
    flush_metrics,
    record_command_failure,
    record_eigensolve,
    record_lp_solve,
    record_seesaw_half_step,
)
from tichain.core.prometheus_metrics import (
    FailureReason,
    LPEngine,
    PrometheusResult,
    SeesawStep,
)


def test_enumeration_records_loop_count(metrics_spy):
    """Loop enumeration counts loops and observes its latency once."""
    loops = enumerate_extreme_points(2, 3)

    assert metrics_spy.value("loops_enumerated_total", d="2", n="3") == len(loops)
    assert metrics_spy.histogram_count("enumeration_latency") == 1
    assert metrics_spy.histogram_sum("loops_per_enumeration") == len(loops)
    metrics_spy.assert_only(
        {"loops_enumerated_total", "enumeration_latency", "loops_per_enumeration"}
    )


def test_lp_solve_is_labelled_by_engine_and_result(metrics_spy):
    """LP outcomes are split by engine and result."""
    record_lp_solve(LPEngine.EXACT, PrometheusResult.SUCCESS, 0.01)
    record_lp_solve(LPEngine.HIGHS, PrometheusResult.ERROR, 0.02)

    assert metrics_spy.lp_solves(LPEngine.EXACT, PrometheusResult.SUCCESS) == 1
    assert metrics_spy.lp_solves(LPEngine.HIGHS, PrometheusResult.ERROR) == 1
    assert metrics_spy.histogram_count("lp_latency", engine="exact") == 1
    assert metrics_spy.histogram_sum("lp_latency", engine="highs") == 0.02


def test_eigensolve_is_labelled_by_ring_size(metrics_spy):
    """Ring eigensolves carry the ring size as a label."""
    record_eigensolve(8, PrometheusResult.SUCCESS, 1.5)

    assert metrics_spy.eigensolves(8, PrometheusResult.SUCCESS) == 1
    assert metrics_spy.histogram_sum("eigensolve_latency", ring_size="8") == 1.5
    metrics_spy.assert_only({"eigensolves_total", "eigensolve_latency"})


def test_seesaw_and_failure_counters(metrics_spy):
    """Half-steps and command failures use their enum values as labels."""
    record_seesaw_half_step(SeesawStep.STATE)
    record_seesaw_half_step(SeesawStep.MEASUREMENT)
    record_seesaw_half_step(SeesawStep.MEASUREMENT)
    record_command_failure("bell bound", FailureReason.LP)

    assert metrics_spy.half_steps(SeesawStep.STATE) == 1
    assert metrics_spy.half_steps(SeesawStep.MEASUREMENT) == 2
    assert (
        metrics_spy.value(
            "command_failures_total", command="bell bound", reason="lp"
        )
        == 1
    )


def test_flush_metrics_without_target_is_a_noop(mocker):
    """Nothing is written unless a textfile path is configured."""
    mocker.patch("tichain.core.metrics.env.METRICS_FILE", None)
    assert flush_metrics() is False


def test_flush_metrics_writes_textfile(tmp_path):
    """A configured path receives the default registry in text format."""
    target = tmp_path / "tichain.prom"
    assert flush_metrics(str(target)) is True
    assert "tichain_" in target.read_text()
