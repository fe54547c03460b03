from dataclasses import dataclass
from enum import StrEnum

from prometheus_client import REGISTRY, CollectorRegistry, Counter, Histogram


class PrometheusResult(StrEnum):
    SUCCESS = "success"
    ERROR = "error"


class LPEngine(StrEnum):
    EXACT = "exact"
    HIGHS = "highs"


class FailureReason(StrEnum):
    INVALID_INPUT = "invalid_input"
    INCONSISTENT = "inconsistent"
    NUMERICAL = "numerical"
    CAP_EXCEEDED = "cap_exceeded"
    EIGENSOLVER = "eigensolver"
    LP = "lp"
    BRACKET = "bracket"
    INTERNAL = "internal"


class SeesawStep(StrEnum):
    STATE = "state"
    MEASUREMENT = "measurement"


BUCKETS_FAST = (0.0001, 0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0, float("inf"))
BUCKETS_SOLVE = (
    0.001,
    0.01,
    0.05,
    0.1,
    0.5,
    1.0,
    5.0,
    10.0,
    30.0,
    60.0,
    300.0,
    float("inf"),
)
BUCKETS_LOOPS = (1, 10, 100, 1_000, 10_000, 100_000, 1_000_000, float("inf"))


@dataclass
class PrometheusMetrics:
    # ti-marginals
    loops_enumerated_total: Counter
    enumeration_latency: Histogram
    loops_per_enumeration: Histogram

    # linear programming and facets
    lp_solves_total: Counter
    lp_latency: Histogram
    facets_enumerated_total: Counter

    # ring eigensolves
    eigensolves_total: Counter
    eigensolve_latency: Histogram

    # see-saw
    seesaw_half_steps_total: Counter

    # cli
    command_failures_total: Counter


def build_metrics(registry: CollectorRegistry = REGISTRY) -> PrometheusMetrics:
    return PrometheusMetrics(
        loops_enumerated_total=Counter(
            "tichain_loops_enumerated_total",
            "Irreducible domino loops produced by simple-cycle enumeration.",
            ["d", "n"],
            registry=registry,
        ),
        enumeration_latency=Histogram(
            "tichain_enumeration_latency_seconds",
            "Wall time of one de Bruijn simple-cycle enumeration.",
            buckets=BUCKETS_SOLVE,
            registry=registry,
        ),
        loops_per_enumeration=Histogram(
            "tichain_loops_per_enumeration",
            "Distribution of loop counts per enumeration.",
            buckets=BUCKETS_LOOPS,
            registry=registry,
        ),
        lp_solves_total=Counter(
            "tichain_lp_solves_total",
            "Linear programs solved, by engine and result.",
            ["engine", "result"],
            registry=registry,
        ),
        lp_latency=Histogram(
            "tichain_lp_latency_seconds",
            "Wall time of one linear program including the certificate check.",
            ["engine"],
            buckets=BUCKETS_FAST,
            registry=registry,
        ),
        facets_enumerated_total=Counter(
            "tichain_facets_enumerated_total",
            "Facets returned by double description runs.",
            registry=registry,
        ),
        eigensolves_total=Counter(
            "tichain_eigensolves_total",
            "Ring ground-state eigensolves, by ring size and result.",
            ["ring_size", "result"],
            registry=registry,
        ),
        eigensolve_latency=Histogram(
            "tichain_eigensolve_latency_seconds",
            "Wall time of one ring ground-state eigensolve.",
            ["ring_size"],
            buckets=BUCKETS_SOLVE,
            registry=registry,
        ),
        seesaw_half_steps_total=Counter(
            "tichain_seesaw_half_steps_total",
            "See-saw half-steps, by step kind.",
            ["step"],
            registry=registry,
        ),
        command_failures_total=Counter(
            "tichain_command_failures_total",
            "CLI invocations that failed with an error, by reason.",
            ["command", "reason"],
            registry=registry,
        ),
    )


metrics = build_metrics()
