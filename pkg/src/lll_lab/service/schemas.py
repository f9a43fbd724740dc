"""Pydantic request/response models for the lab service.

An instance can be referenced three ways: a path on the server's filesystem,
an inline document (the instance file format), or a generator spec.  Exactly
one must be given.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator


class GeneratorSpec(BaseModel):
    kind: Literal["ksat", "hypergraph"]
    seed: int = 0
    num_clauses: int = 2000
    k: int = 10
    max_occurrence: int = 2
    num_edges: int = 200
    edge_size: int = 5
    max_degree: int = 2
    num_colors: int = 2


class InstanceRef(BaseModel):
    path: Optional[str] = None
    document: Optional[dict] = None
    generator: Optional[GeneratorSpec] = None

    @model_validator(mode="after")
    def _exactly_one(self):
        given = sum(x is not None for x in (self.path, self.document, self.generator))
        if given != 1:
            raise ValueError("give exactly one of path, document, generator")
        return self


class GenRequest(BaseModel):
    generator: GeneratorSpec
    criterion_delta: float = 0.0


class CriterionModel(BaseModel):
    d: int
    p: float
    delta: float
    threshold: float
    satisfied: bool
    trivially_local: bool


class GenResponse(BaseModel):
    document: dict
    n: int
    d: int
    p: float
    num_vars: int
    criterion: CriterionModel


class RunRequest(BaseModel):
    instance: InstanceRef
    seed: int = 0
    max_steps: Optional[int] = None


class RunReportModel(BaseModel):
    seed: int
    T: int
    terminated: bool
    resample_total: int
    per_step_sizes: list[int]
    final_assignment_digest: str


class ClassifyRequest(BaseModel):
    instance: InstanceRef
    seed: int = 0
    eps: Optional[float] = Field(default=None, gt=0.0, lt=0.1)
    max_steps: Optional[int] = None


class ParamsModel(BaseModel):
    eps: float
    lam: float = Field(alias="lambda")
    ell: float
    ell_eff: float
    size_threshold: int
    R_max: int
    phase1_steps: int
    log1p_n: float
    feasible: bool
    trivially_local: bool

    model_config = {"populate_by_name": True}


class ComponentModel(BaseModel):
    size: int
    diameter: int


class DecompositionModel(BaseModel):
    colors: int
    max_cluster_diameter: int
    cluster_count: int
    valid: bool


class LocalReportModel(BaseModel):
    node_averaged: float
    worst_case: int
    phase1_steps: int
    secure_round: int
    insecure_fraction: float
    e_good: bool
    fallback_used: bool
    terminated: bool
    T_global: int


class ClassifyResponse(BaseModel):
    seed: int
    params: ParamsModel
    risky_count: int
    insecure_count: int
    components: list[ComponentModel]
    decomposition: DecompositionModel
    ruling_set_size: int
    ruling_set_verified: bool
    local: LocalReportModel
    round_histogram: list[tuple[int, int]]


class QueryRequest(BaseModel):
    instance: InstanceRef
    seed: int = 0
    node: int
    volume_mode: bool = False


class QueryResponse(BaseModel):
    node: int
    values: dict[int, int]
    probes: int
    explored_nodes: int
    component_size: int
    rounds_simulated: int
    fallback: bool


class VerifyRequest(BaseModel):
    instance: Optional[InstanceRef] = None   # default: bundled tiny instance
    seeds: list[int] = Field(default_factory=lambda: [0, 1, 2])
    suites: Optional[list[str]] = None
    mc_trials: int = 20_000


class CheckModel(BaseModel):
    suite: str
    name: str
    passed: bool
    detail: str


class VerifyResponse(BaseModel):
    passed: bool
    non_termination: bool
    checks: list[CheckModel]


class SweepRequest(BaseModel):
    param: Literal["p", "n", "d", "seeds"]
    values: list[float]
    seeds: list[int] = Field(default_factory=lambda: list(range(10)))
    num_clauses: int = 2000
    k: int = 10
    max_occurrence: int = 2
    instance_seed: int = 1
    query_samples: int = 20


class SweepResponse(BaseModel):
    csv: str
    rows: list[dict]
    non_termination: bool
