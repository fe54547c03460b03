import math
from functools import cached_property
from typing import Literal

from pydantic_settings import BaseSettings

SCHEMA_VERSION = 1

# Correlator coordinates, in the column order of the inequality tables.
CORRELATOR_NAMES = (
    "E0",
    "E1",
    "E12_00",
    "E12_01",
    "E12_10",
    "E12_11",
    "E13_00",
    "E13_01",
    "E13_10",
    "E13_11",
)


class Env(BaseSettings):
    # Validity checks
    VALIDITY_TOL: float = 1e-10  # Hermiticity, PSD, trace
    RECONSTRUCTION_TOL: float = 1e-9  # relative, for eigendecompositions
    PROBABILITY_TOL: float = 1e-12  # normalisation of joint distributions
    CONSISTENCY_TOL: float = 1e-10  # TI marginal consistency
    DECOMPOSE_TOL: float = 1e-9  # support threshold and negative-residual guard

    # Classical TI marginals
    DEBRUIJN_EDGE_CAP: int = 1_000_000

    # Witnesses
    THETA_GRID: int = 512
    THETA_XTOL: float = 1e-10
    PPT_BISECTION_XTOL: float = 1e-12
    VIOLATION_TOL: float = 1e-8  # smallest witness violation reported as positive

    # Linear programming / polytope
    LP_CERTIFICATE_TOL: float = 1e-9
    MEMBERSHIP_TOL: float = 1e-9
    GENUINE_GAP_TOL: float = 1e-6  # smallest TI-over-tripartite gap counted as genuine
    GENUINE_WINDOW: int = 6  # sites of the nonsignaling extension behind P123
    DD_BUDGET: int = 20_000  # vertex count x dimension

    # Ring ground states
    RING_SIZE_CAP: int = 10
    EXTRAPOLATION: Literal["commensurate", "inverse-n"] = "commensurate"
    EIGSH_TOL: float = 1e-12
    EIGSH_MAX_ITERS: int = 5000
    EIGSH_SEED: int = 1234

    # See-saw
    SEESAW_MAX_ITERS: int = 50
    SEESAW_TOL: float = 1e-9

    # CLI fan-out for independent sweep items
    THREADS: int = 1
    METRICS_FILE: str | None = None

    @cached_property
    def behavior_denominator(self) -> int:
        """
        Common denominator of every vertex behavior of the window-3 polytope.

        Loop lengths are bounded by the number of de Bruijn nodes (4**2 = 16),
        so lcm(1..16) clears all of them.
        """
        return math.lcm(*range(1, 17))

    # Logging
    LOG_JSON: bool = False
    LOGURU_LEVEL: str = "INFO"
    LOG_FILE: str | None = None
    LOG_ROTATION: str = "50 MB"
    LOG_COMPRESSION: str = "zip"


env = Env()
