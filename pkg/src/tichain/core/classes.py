from pydantic import BaseModel, ConfigDict, Field, model_validator

from tichain.core.config import SCHEMA_VERSION, env


class WitnessReport(BaseModel):
    value: float
    tis_bound: float
    ti_bound: float | None = None
    violation: float
    excluded_block_size: int | None = None
    boundary_term: float | None = None
    ppt: bool | None = None

    @model_validator(mode="after")
    def _violation_matches(self):
        if abs(self.violation - (self.value - self.tis_bound)) > env.VIOLATION_TOL:
            raise ValueError("violation must equal value - tis_bound")
        return self


class GroundResult(BaseModel):
    energy_per_site: float
    ring_sizes: list[int]
    energies: list[float]
    extrapolated: float
    residual: float


class SeesawResult(BaseModel):
    value: float
    converged: bool
    iterations: int
    history: list[float] = []
    register_size: int
    ring_size: int


class FacetCheck(BaseModel):
    valid: bool
    tight: bool
    face_dim: int
    ambient_dim: int

    @property
    def is_facet(self) -> bool:
        return self.valid and self.tight and self.face_dim == self.ambient_dim - 1


class RunConfig(BaseModel):
    """Command parameters loadable from ``--config FILE.json``; unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")

    rings: list[int] | None = None
    register_size: int | None = Field(default=None, ge=3)
    ring_size: int | None = Field(default=None, ge=3)
    max_iters: int | None = Field(default=None, ge=1)
    seed: int | None = None
    theta_grid: int | None = Field(default=None, ge=64)
    tolerance: float | None = Field(default=None, gt=0)
    output: str | None = None
    format: str | None = Field(default=None, pattern="^(json|csv|table)$")


class Envelope(BaseModel):
    """Top-level JSON document written by every command."""

    schema_: int = Field(default=SCHEMA_VERSION, alias="schema")
    command: str
    generated_at: str | None = None
    result: dict | list

    model_config = ConfigDict(populate_by_name=True)
