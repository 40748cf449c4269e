"""Request and response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..model import GameParams, TypeProfile


class ProfileIn(BaseModel):
    """Population composition: one belief and one proportion per type."""

    beliefs: list[float]
    proportions: list[float]

    def to_domain(self) -> TypeProfile:
        return TypeProfile(tuple(self.beliefs), tuple(self.proportions))


class ParamsIn(BaseModel):
    """Game constants; defaults match the standard experiment setting."""

    k: int = 20
    u: float = 0.5
    alpha: float = 0.05
    n_agents: int = 1000

    def to_domain(self) -> GameParams:
        return GameParams(
            k=self.k, u=self.u, alpha=self.alpha, n_agents=self.n_agents
        )


class DetectRequest(BaseModel):
    profile: ProfileIn


class DetectResponse(BaseModel):
    discriminant: float
    decision: int | None
    indifferent: bool


class EssRequest(BaseModel):
    profile: ProfileIn
    params: ParamsIn = ParamsIn()


class EssResponse(BaseModel):
    discriminant: float
    threshold: float
    ess_set: list[int]
    interior_point: float | None
    interior_degenerate: bool
    predicted_limit_from_half: int | None
    at_threshold: bool


class MeanfieldRequest(BaseModel):
    profile: ProfileIn
    params: ParamsIn = ParamsIn()
    x0: float | list[float] = 0.5
    t_end: float | None = None
    n_samples: int = 201


class MeanfieldResponse(BaseModel):
    terminal_x: float
    terminal_x_per_type: list[float]
    csv: str


class SimulateRequest(BaseModel):
    profile: ProfileIn
    params: ParamsIn = ParamsIn()
    trials: int = 100
    base_seed: int = 12345
    max_steps: int = 100_000
    sample_every: int = 0
    initial_rule: str = "coin"
    graph_per_trial: bool = True
    graph_seed: int | None = None
    workers: int = 1


class SimulateResponse(BaseModel):
    trials: int
    mean_final_x: float
    mean_final_x_per_type: list[float]
    absorbed_fraction: float
    mean_steps_run: float
    final_x: list[float]
    steps_run: list[int]
    absorbed: list[bool]
    summary_csv: str
    trajectory_csv: str | None


class SweepRequest(BaseModel):
    """Mirrors the sweep spec; grid=None selects the default belief grid."""

    beliefs: list[float]
    proportions: list[float]
    sweep_index: int
    grid: list[float] | None = None
    k: int = 20
    u: float = 0.5
    alpha: float = 0.05
    n_agents: int = 1000
    trials: int = 100
    base_seed: int = 12345
    max_steps: int = 100_000
    graph_per_trial: bool = True
    workers: int = 1


class SweepRowOut(BaseModel):
    swept_value: float
    discriminant: float
    centralized_decision: int | None
    predicted_limit: int | None
    meanfield_final_x: float
    simulated_mean_final_x: float
    trials: int


class SweepResponse(BaseModel):
    rows: list[SweepRowOut]
    csv: str
    summary: str


class GraphGenerateRequest(BaseModel):
    n: int
    k: int
    seed: int = 0
    max_retries: int = Field(default=1000, ge=1)


class GraphGenerateResponse(BaseModel):
    n: int
    k: int
    connected: bool
    edge_list: str


class GraphValidateRequest(BaseModel):
    edge_list: str
    n: int | None = None
    k: int | None = None


class GraphValidateResponse(BaseModel):
    ok: bool
    violations: list[str]
    n: int
    k: int
    connected: bool


class HealthResponse(BaseModel):
    status: str
